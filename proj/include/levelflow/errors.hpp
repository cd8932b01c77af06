#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace levelflow {

//! Base class for all errors raised by this library.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

//! Dimension or shape mismatch between inputs and the declared layout.
struct ShapeError : Error {
  using Error::Error;
};

//! Non-finite values encountered (diverging trajectory, loss blow-up, ...).
struct NumericalError : Error {
  using Error::Error;
};

//! The matrix grad_xi^T grad_xi is singular at the evaluation point.
struct RankError : Error {
  using Error::Error;
};

//! Iterative scheme failed to reach its tolerance within the step budget.
struct ConvergenceError : Error {
  ConvergenceError(const std::string& what, double residual, std::size_t steps)
      : Error(what), residual(residual), steps(steps) {}
  double residual;
  std::size_t steps;
};

//! Invalid or inconsistent configuration values.
struct ConfigError : Error {
  using Error::Error;
};

//! File read/write failure.
struct IoError : Error {
  using Error::Error;
};

//! Histogram input carries no mass inside the requested bins.
struct DensityError : Error {
  using Error::Error;
};

}  // namespace levelflow
