#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace gaitforge {

// Base for every error the library raises on purpose.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Input is readable but violates a documented contract.
class ValidationError : public Error {
 public:
  using Error::Error;
};

// A text file failed to parse; carries the 1-based line number.
class ParseError : public ValidationError {
 public:
  ParseError(const std::string& source, std::size_t line, const std::string& what)
      : ValidationError(source + ":" + std::to_string(line) + ": " + what), line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

// A binary or image file has a bad header, magic, or out-of-range payload.
class FormatError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

// File missing, unreadable, or unwritable.
class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace gaitforge
