#pragma once

#include <stdexcept>
#include <string>

namespace pcda {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Operand dimensions do not agree.
class ShapeError : public Error {
 public:
  using Error::Error;
};

/// An operation was called out of order (e.g. backward before forward).
class StateError : public Error {
 public:
  using Error::Error;
};

/// A non-finite value was produced or consumed.
class NumericError : public Error {
 public:
  using Error::Error;
};

/// Invalid configuration or input data.
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace pcda
