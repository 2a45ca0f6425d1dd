#pragma once

#include <stdexcept>
#include <string>

namespace krcd {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed arguments: dimension mismatches, single-class labels, ...
class ArgumentError : public Error {
 public:
  using Error::Error;
};

/// Inconsistent configuration, e.g. a basis size not smaller than N.
class ConfigurationError : public Error {
 public:
  using Error::Error;
};

/// Bad input data (non-finite values, ragged or missing columns).
class InputError : public Error {
 public:
  using Error::Error;
};

/// Numerical breakdown. Carries the last condition estimate when one exists.
class NumericError : public Error {
 public:
  explicit NumericError(const std::string& what, double condition_estimate = 0.0)
      : Error(what), condition_estimate_(condition_estimate) {}

  double condition_estimate() const noexcept { return condition_estimate_; }

 private:
  double condition_estimate_;
};

}  // namespace krcd
