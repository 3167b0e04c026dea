#pragma once

#include <stdexcept>
#include <string>

namespace schloegl {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid user input: sizes, parameters, malformed config files.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Eigen-solver failure, non-convergent iteration, singular solve.
class NumericalError : public Error {
 public:
  using Error::Error;
};

/// Actuator support resolved by too few grid nodes.
class ResolutionError : public ConfigError {
 public:
  using ConfigError::ConfigError;
};

/// Gram system between indicators and bumps is singular.
class DegenerateFamilyError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

/// State left the admissible range while time stepping.
class BlowUpError : public Error {
 public:
  BlowUpError(const std::string& what, double time_reached)
      : Error(what), time_reached_(time_reached) {}
  double time_reached() const noexcept { return time_reached_; }

 private:
  double time_reached_;
};

}  // namespace schloegl
