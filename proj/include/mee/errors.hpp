#pragma once

#include <stdexcept>
#include <string>

namespace mee {

/// Base class for all library errors.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Raised when an argument violates a documented precondition.
class InvalidArgument : public Error {
public:
  using Error::Error;
};

class DimensionMismatch : public Error {
public:
  using Error::Error;
};

/// The information potential of an error vector is <= 0, so its logarithm is
/// undefined. Only possible for sign-changing windows.
class NonpositivePotential : public Error {
public:
  using Error::Error;
};

/// Malformed or inconsistent experiment configuration.
class ConfigError : public Error {
public:
  using Error::Error;
};

} // namespace mee
