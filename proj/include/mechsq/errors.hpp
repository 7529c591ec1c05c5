#pragma once

#include <stdexcept>
#include <string>

namespace mechsq {

/// Base of all library errors. `module()` names the module that raised it.
class Error : public std::runtime_error {
 public:
  Error(std::string module, const std::string& what)
      : std::runtime_error(module + ": " + what), module_(std::move(module)) {}

  const std::string& module() const noexcept { return module_; }

 private:
  std::string module_;
};

/// Invalid input: bad configuration, non-finite or out-of-range parameters.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Input is valid but outside the physical regime an operation requires
/// (e.g. a normal form requested for a stable parameter set).
class RegimeError : public Error {
 public:
  using Error::Error;
};

/// Numerical failure: overflow guard tripped, singular matrix, bracket failure.
class NumericError : public Error {
 public:
  using Error::Error;
};

}  // namespace mechsq
