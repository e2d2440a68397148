#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace arnn::csv {

/// Splits on commas; no quoting (identifiers never contain commas).
std::vector<std::string_view> split(std::string_view line);

/// Strips surrounding spaces, tabs and a trailing carriage return.
std::string_view trim(std::string_view s);

std::optional<double> to_double(std::string_view s);
std::optional<long> to_long(std::string_view s);

/// Shortest representation that reads back to the same double.
std::string format(double v);

}  // namespace arnn::csv
