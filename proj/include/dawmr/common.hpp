#pragma once

#include <stdexcept>
#include <string>

namespace dawmr {

// Bad arguments or configuration. Maps to CLI exit code 1.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Filesystem failures. Maps to CLI exit code 2.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A file exists but its bytes do not follow the expected layout.
class FormatError : public IoError {
 public:
  using IoError::IoError;
};

inline void require(bool condition, const std::string& message) {
  if (!condition) throw ValidationError(message);
}

}  // namespace dawmr
