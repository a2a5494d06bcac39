#pragma once

#include <stdexcept>
#include <string>

namespace atm {

/// Caller broke a documented precondition (dimension, ordering, endpoint mismatch).
class ContractViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Base for failures that arise from the numbers themselves.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A coefficient callback failed or returned unusable matrices.
class CoefficientError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

/// B(z) could not be inverted.
class SingularCoefficientError : public CoefficientError {
 public:
  explicit SingularCoefficientError(double z)
      : CoefficientError("B not invertible at z = " + std::to_string(z)), z_(z) {}
  double z() const noexcept { return z_; }

 private:
  double z_;
};

/// Transfer matrix lost too much precision (thick evanescent layer).
class OverflowError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

/// Adaptive integration or quadrature gave up.
class ConvergenceError : public NumericalError {
 public:
  ConvergenceError(const std::string& what, double location)
      : NumericalError(what), location_(location) {}
  double location() const noexcept { return location_; }

 private:
  double location_;
};

/// The exterior medium has no clean causal split of its modes.
class IrregularMediumError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

/// Bad user input (stack files, CLI arguments).
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace atm
