#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace arnn::cli {

enum ExitCode : int {
  kOk = 0,
  kUnexpected = 1,
  kUsage = 2,
  kData = 3,
  kNumeric = 4,
};

/// Runs the `arnn` front end. `args` excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace arnn::cli
