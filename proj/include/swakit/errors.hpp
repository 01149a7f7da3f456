#pragma once

#include <stdexcept>
#include <string>

namespace swakit {

/// Invalid or inconsistent configuration: bad keys, bad values, malformed input data.
class ConfigError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Structural mismatch between parameter vectors (group tables, lengths).
class LayoutError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Non-finite values or numerical breakdown inside a computation.
class NumericError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Filesystem and serialization failures.
class IoError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

}  // namespace swakit
