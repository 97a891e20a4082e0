#pragma once

#include <stdexcept>
#include <string>

namespace cnlm {

/// Invalid configuration content: bad scenario files, out-of-range parameters,
/// inconsistent cross-field combinations. The CLI maps this to exit code 2.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what_arg) : std::runtime_error(what_arg) {}
};

/// Mismatched vector/module dimensions between related arguments.
class DimensionError : public std::runtime_error {
 public:
  explicit DimensionError(const std::string& what_arg) : std::runtime_error(what_arg) {}
};

/// A request that would exceed the 3^N state-enumeration cap.
class CapacityError : public std::runtime_error {
 public:
  explicit CapacityError(const std::string& what_arg) : std::runtime_error(what_arg) {}
};

}  // namespace cnlm
