#pragma once

#include <stdexcept>
#include <string>

namespace gaecausal {

// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A documented precondition (shape, range, validity) was violated.
class PreconditionError : public Error {
 public:
  using Error::Error;
};

// A numeric result could not be represented in double precision.
class OverflowError : public Error {
 public:
  using Error::Error;
};

// Training produced a non-finite loss.
class DivergenceError : public Error {
 public:
  using Error::Error;
};

// A text input could not be parsed. Line and column are 1-based; 0 means unknown.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line = 0, std::size_t column = 0)
      : Error(format(what, line, column)), message_(what), line_(line), column_(column) {}

  std::size_t line() const noexcept { return line_; }
  std::size_t column() const noexcept { return column_; }
  const std::string& message() const noexcept { return message_; }

  // Same position, message prefixed with where the text came from.
  ParseError with_origin(const std::string& origin) const {
    return ParseError(origin + ": " + message_, line_, column_);
  }

 private:
  static std::string format(const std::string& what, std::size_t line, std::size_t column) {
    if (line == 0) return what;
    return what + " (line " + std::to_string(line) + ", column " + std::to_string(column) + ")";
  }

  std::string message_;
  std::size_t line_;
  std::size_t column_;
};

inline void require(bool condition, const std::string& message) {
  if (!condition) throw PreconditionError(message);
}

}  // namespace gaecausal
