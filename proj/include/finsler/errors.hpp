#pragma once

#include <stdexcept>
#include <string>

namespace finsler {

/// Base class for every error raised by the engine.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A field produced a non-finite value, or a univariate function was applied
/// outside its domain (log of a non-positive number, reciprocal of zero, ...).
class JetDomainError : public Error {
 public:
  using Error::Error;
};

/// Two jets with different centers or variable counts were combined.
class JetMismatchError : public Error {
 public:
  using Error::Error;
};

/// A derivative was requested beyond the order carried by a jet.
class JetOrderError : public Error {
 public:
  using Error::Error;
};

class DegenerateMetricError : public Error {
 public:
  DegenerateMetricError(const std::string& what, double eigenvalue)
      : Error(what), eigenvalue_(eigenvalue) {}
  double eigenvalue() const noexcept { return eigenvalue_; }

 private:
  double eigenvalue_;
};

/// Scenario or model definition could not be parsed or validated.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// The conformal sign orientation probe found the opposite orientation.
class ConventionError : public Error {
 public:
  using Error::Error;
};

}  // namespace finsler
