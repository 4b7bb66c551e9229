#pragma once

#include <stdexcept>
#include <string>

namespace irsnoma {

// Base for every error raised by the library. Callers that only need to
// report failures can catch this; the subclasses exist for tests and for
// callers that recover from specific conditions (e.g. a singular ZF design).
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DimensionMismatch : public Error {
 public:
  using Error::Error;
};

class SingularMatrix : public Error {
 public:
  using Error::Error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

class NumericalError : public Error {
 public:
  using Error::Error;
};

class CapacityInfeasible : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace irsnoma
