#include "element/error.hpp"

namespace element {

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::invalid_argument: return "invalid-argument";
    case ErrorKind::empty_input: return "empty-input";
    case ErrorKind::degenerate_distance: return "degenerate-distance";
    case ErrorKind::numerical_failure: return "numerical-failure";
    case ErrorKind::empty_graph: return "empty-graph";
    case ErrorKind::parse_error: return "parse-error";
    case ErrorKind::io_error: return "io-error";
  }
  return "unknown";
}

Error::Error(ErrorKind kind, const std::string& message)
    : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind) {}

ParseError::ParseError(const std::string& message, std::size_t offset, std::size_t line,
                       std::size_t column)
    : Error(ErrorKind::parse_error, message), offset_(offset), line_(line), column_(column) {}

ParseError ParseError::at_offset(std::size_t offset, const std::string& what) {
  return ParseError(what + " (at byte " + std::to_string(offset) + ")", offset, 0, 0);
}

ParseError ParseError::at_line(std::size_t line, std::size_t column, const std::string& what) {
  return ParseError(what + " (line " + std::to_string(line) + ", column " + std::to_string(column) + ")",
                    0, line, column);
}

void fail(ErrorKind kind, const std::string& message) { throw Error(kind, message); }

}  // namespace element
