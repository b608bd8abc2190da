#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace swarm {

/// Base for every error the library throws.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Input violates a documented precondition (shape, sign, finiteness).
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// Query outside the valid domain (time outside a trajectory, speed outside a
/// calibration table).
class RangeError : public Error {
 public:
  using Error::Error;
};

/// Operation not defined for the requested mode combination, e.g. static
/// assignment with silhouette subgoals.
class ModeError : public Error {
 public:
  using Error::Error;
};

/// Unreadable or inconsistent scenario / config input.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Malformed text input; carries the 1-based row and 0-based field index.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t row, std::size_t field)
      : Error("row " + std::to_string(row) + ", field " + std::to_string(field) +
              ": " + what),
        row_(row),
        field_(field) {}

  std::size_t row() const noexcept { return row_; }
  std::size_t field() const noexcept { return field_; }

 private:
  std::size_t row_;
  std::size_t field_;
};

}  // namespace swarm
