#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace csic {

// Violated precondition or invariant of a domain type. CLI exit code 2.
class ValidationError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

// Malformed file contents. Carries the byte offset (or line number for text
// formats) where parsing failed.
class ParseError : public ValidationError {
public:
  ParseError(const std::string& what, std::uint64_t offset)
      : ValidationError(what + " (at byte offset " + std::to_string(offset) + ")"),
        offset_(offset) {}
  std::uint64_t offset() const { return offset_; }

private:
  std::uint64_t offset_;
};

// File system failure. CLI exit code 4.
class IoError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

}  // namespace csic
