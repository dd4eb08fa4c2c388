#pragma once

#include <stdexcept>
#include <string>

namespace einit {

enum class ErrorKind {
  InvalidInput,
  DegenerateCloud,
  NumericalFailure,
  DegenerateCorrespondence,
  ParseError,
  IoError,
};

inline const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidInput: return "InvalidInput";
    case ErrorKind::DegenerateCloud: return "DegenerateCloud";
    case ErrorKind::NumericalFailure: return "NumericalFailure";
    case ErrorKind::DegenerateCorrespondence: return "DegenerateCorrespondence";
    case ErrorKind::ParseError: return "ParseError";
    case ErrorKind::IoError: return "IoError";
  }
  return "Unknown";
}

/// Every failure raised by the library carries a kind so callers (and the CLI
/// exit-code mapping) can dispatch without string matching.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

/// Raised by the file readers; `line` is 1-based, 0 when not tied to a line.
class ParseError : public Error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : Error(ErrorKind::ParseError,
              line > 0 ? "line " + std::to_string(line) + ": " + what : what),
        line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) { throw Error(kind, what); }

}  // namespace einit
