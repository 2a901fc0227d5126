#pragma once

#include <stdexcept>
#include <string>

namespace cftwin {

enum class ErrorKind {
  Structural,  // cycles, malformed diagrams
  Lookup,      // unknown variable or fixture name
  Argument,    // bad call arguments (overlapping sets, empty input, ...)
  Syntax,      // expression parse errors
  Domain,      // values outside a variable's domain
  Validation,  // model or regime fails its invariants
  Budget,      // enumeration or search limits exceeded
  Config,      // incompatible configuration (e.g. agent/environment mismatch)
  Io,
};

const char* to_string(ErrorKind kind) noexcept;

/// Single exception type for the library; `kind()` drives the C API status
/// mapping and CLI exit codes.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

/// Raised by the expression parser; `offset` is the byte position in the source.
class SyntaxError : public Error {
 public:
  SyntaxError(std::size_t offset, const std::string& message)
      : Error(ErrorKind::Syntax, message + " at offset " + std::to_string(offset)),
        offset_(offset) {}

  std::size_t offset() const noexcept { return offset_; }

 private:
  std::size_t offset_;
};

}  // namespace cftwin
