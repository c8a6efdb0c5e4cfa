#pragma once

#include <stdexcept>
#include <string>

namespace exq {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Operand extents are incompatible with the requested operation.
class ShapeError : public Error {
 public:
  using Error::Error;
};

/// A file or structured-text document does not match its declared format.
class FormatError : public Error {
 public:
  using Error::Error;
};

/// A configuration value is outside its legal domain.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Rank correlation requested for an input with no variation.
class UndefinedCorrelation : public Error {
 public:
  using Error::Error;
};

/// Training produced a non-finite loss.
class DivergenceError : public Error {
 public:
  using Error::Error;
};

}  // namespace exq
