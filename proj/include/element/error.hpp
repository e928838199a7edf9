#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace element {

enum class ErrorKind {
  invalid_argument,
  empty_input,
  degenerate_distance,
  numerical_failure,
  empty_graph,
  parse_error,
  io_error,
};

const char* to_string(ErrorKind kind);

/// Every failure raised by the library carries one of the kinds above so
/// callers (and the CLI exit-code mapping) can branch without string matching.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message);

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

/// Parse failures report where they happened: a byte offset for binary
/// streams, or a 1-based line/column for text.
class ParseError : public Error {
 public:
  static ParseError at_offset(std::size_t offset, const std::string& what);
  static ParseError at_line(std::size_t line, std::size_t column, const std::string& what);

  std::size_t offset() const noexcept { return offset_; }
  std::size_t line() const noexcept { return line_; }
  std::size_t column() const noexcept { return column_; }

 private:
  ParseError(const std::string& message, std::size_t offset, std::size_t line, std::size_t column);

  std::size_t offset_ = 0;
  std::size_t line_ = 0;
  std::size_t column_ = 0;
};

[[noreturn]] void fail(ErrorKind kind, const std::string& message);

}  // namespace element
