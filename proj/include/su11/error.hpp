#pragma once

#include <stdexcept>
#include <string>

namespace su11 {

/// Bad input: malformed config, violated type invariant, unmet precondition.
/// The CLI maps this family to exit code 2.
class ValidationError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

/// Failure of a numerical stage on otherwise valid input (exit code 3).
class NumericError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Argument outside the domain where a formula is defined or valid.
class DomainError : public NumericError {
public:
  using NumericError::NumericError;
};

class ConvergenceError : public NumericError {
public:
  using NumericError::NumericError;
};

class CalibrationError : public NumericError {
public:
  using NumericError::NumericError;
};

class FitError : public NumericError {
public:
  using NumericError::NumericError;
};

class EstimationError : public NumericError {
public:
  using NumericError::NumericError;
};

/// Composite reflectivity with modulus above one.
class PassivityError : public ValidationError {
public:
  using ValidationError::ValidationError;
};

/// Peaks too close for a width to mean anything.
class ResolutionError : public NumericError {
public:
  using NumericError::NumericError;
};

} // namespace su11
