#pragma once

#include <stdexcept>
#include <string>

namespace mqskew {

// Base of every error raised by the library. The CLI maps subclasses onto
// exit codes (config 1, consistency 2, resource cap 3).
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Requested size exceeds a configured engine cap.
class SizeError : public Error {
 public:
  using Error::Error;
};

// Operands expressed in different bases or with incompatible dimensions.
class ShapeError : public Error {
 public:
  using Error::Error;
};

class GeometryError : public Error {
 public:
  using Error::Error;
};

// Argument outside the mathematical domain of an operation.
class DomainError : public Error {
 public:
  using Error::Error;
};

// A numerical identity that must hold (normalization, sandwich inequality,
// cross-checked code paths) was violated.
class ConsistencyError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace mqskew
