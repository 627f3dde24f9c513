#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace ratio {

/// Raised when a precondition on an argument is violated (dimension
/// mismatch, non-positive temperature, out-of-range class index, ...).
class InvalidArgument : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

/// Raised while decoding a file; carries the byte offset of the failure.
class ParseError : public std::runtime_error {
public:
  ParseError(std::size_t offset, const std::string &what)
      : std::runtime_error(what + " (at byte " + std::to_string(offset) + ")"),
        offset_(offset) {}

  std::size_t offset() const noexcept { return offset_; }

private:
  std::size_t offset_;
};

/// Raised when a configuration is structurally valid but unusable.
class ConfigError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

} // namespace ratio
