// SPDX-License-Identifier: Apache-2.0

#ifndef SUBTHZ_ERRORS_HPP
#define SUBTHZ_ERRORS_HPP

#include <cstddef>
#include <stdexcept>
#include <string>

namespace subthz {

enum class ErrorKind { config, data, numerical };

/// Base of every library error. The kind selects the CLI exit code.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& what) : Error(ErrorKind::config, what) {}
};

class DataError : public Error {
 public:
  explicit DataError(const std::string& what) : Error(ErrorKind::data, what) {}
};

class NumericalError : public Error {
 public:
  explicit NumericalError(const std::string& what) : Error(ErrorKind::numerical, what) {}
};

/// Input outside a function's mathematical domain (negative or non-finite amplitude, ...).
class DomainError : public DataError {
 public:
  explicit DomainError(const std::string& what) : DataError(what) {}
};

/// Input outside a model's validity range; carries the violated bound.
class RangeError : public DataError {
 public:
  RangeError(const std::string& what, double bound) : DataError(what), bound_(bound) {}
  double bound() const noexcept { return bound_; }

 private:
  double bound_;
};

/// Malformed text input; line is 1-based, 0 when not applicable.
class ParseError : public DataError {
 public:
  ParseError(const std::string& what, std::size_t line) : DataError(what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

class IoError : public DataError {
 public:
  explicit IoError(const std::string& what) : DataError(what) {}
};

inline int exit_code(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::config:
      return 2;
    case ErrorKind::data:
      return 3;
    case ErrorKind::numerical:
      return 4;
  }
  return 1;
}

}  // namespace subthz

#endif  // SUBTHZ_ERRORS_HPP
