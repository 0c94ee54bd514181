#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace negev {

/// Base class for all library errors.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Shape or axis disagreement between tensors or between a tensor and an index.
struct DimensionError : Error {
  using Error::Error;
};

/// Invalid user-supplied configuration value.
struct ConfigError : Error {
  using Error::Error;
};

/// Operation called on an object in the wrong state (missing gradient,
/// unfrozen classifier, empty checkpoint list, ...).
struct StateError : Error {
  using Error::Error;
};

/// Non-finite value where a finite one is required.
struct NumericError : Error {
  using Error::Error;
};

/// Malformed file content. Carries the byte offset of the first bad byte.
struct ParseError : Error {
  ParseError(const std::string& what, std::size_t offset)
      : Error(what + " (byte offset " + std::to_string(offset) + ")"),
        byte_offset(offset) {}
  std::size_t byte_offset;
};

/// Filesystem-level failure; the message names the offending path.
struct IoError : Error {
  using Error::Error;
};

/// Violation of the training/evaluation protocol, e.g. reading a mask that
/// the current mode is not allowed to see.
struct ProtocolError : Error {
  using Error::Error;
};

}  // namespace negev
