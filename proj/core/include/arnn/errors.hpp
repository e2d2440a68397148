#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace arnn {

/// Broad failure class; the command-line tool maps each one to an exit code.
enum class ErrorKind {
  Usage,    // bad sizes or parameters handed to an API
  Data,     // malformed input files, empty data, missing compromise window
  Numeric,  // fixed-point divergence, singular systems
  Io,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

class InvalidSizeError : public Error {
 public:
  explicit InvalidSizeError(const std::string& what) : Error(ErrorKind::Usage, what) {}
};

class InvalidParameterError : public Error {
 public:
  explicit InvalidParameterError(const std::string& what) : Error(ErrorKind::Usage, what) {}
};

class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& what, double residual, int iterations)
      : Error(ErrorKind::Numeric, what), residual_(residual), iterations_(iterations) {}
  double residual() const noexcept { return residual_; }
  int iterations() const noexcept { return iterations_; }

 private:
  double residual_;
  int iterations_;
};

class SingularityError : public Error {
 public:
  SingularityError(const std::string& what, double rcond)
      : Error(ErrorKind::Numeric, what), rcond_(rcond) {}
  /// Reciprocal condition estimate of the offending matrix.
  double rcond() const noexcept { return rcond_; }

 private:
  double rcond_;
};

class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line)
      : Error(ErrorKind::Data, what + " (line " + std::to_string(line) + ")"), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

class WindowError : public Error {
 public:
  explicit WindowError(const std::string& what) : Error(ErrorKind::Data, what) {}
};

class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& what) : Error(ErrorKind::Data, what) {}
};

class ShapeError : public Error {
 public:
  explicit ShapeError(const std::string& what) : Error(ErrorKind::Data, what) {}
};

class IoError : public Error {
 public:
  explicit IoError(const std::string& what) : Error(ErrorKind::Io, what) {}
};

}  // namespace arnn
