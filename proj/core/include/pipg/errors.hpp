#pragma once

#include <stdexcept>
#include <string>

namespace pipg {

// Common base so callers can catch everything thrown by this library at once.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Dimension mismatches, out-of-range parameters, malformed call arguments.
class InvalidArgumentError : public Error {
 public:
  using Error::Error;
};

// NaN or infinity found in data that must be finite.
class NumericInputError : public Error {
 public:
  using Error::Error;
};

// A quantity the algorithm relies on left its valid range (e.g. innovation
// variance collapsed to zero). Indicates the run cannot continue, not a bug
// in the caller's arguments.
class InternalInvariantError : public Error {
 public:
  using Error::Error;
};

// A matrix that must be positive definite failed to factor.
class IllConditionedError : public Error {
 public:
  using Error::Error;
};

// A reference computation (used for cross-checking) did not converge.
class OracleFailureError : public Error {
 public:
  using Error::Error;
};

// Structural or semantic problems in an experiment configuration.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Filesystem and parsing failures.
class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace pipg
