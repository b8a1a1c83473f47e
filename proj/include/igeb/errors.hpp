#pragma once

#include <stdexcept>
#include <string>

namespace igeb {

// Base class for all library errors.
struct Error : std::runtime_error {
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// Invalid user-supplied values: bad matrices, orderings, config fields.
// Maps to CLI exit code 2.
struct ParameterError : Error {
  explicit ParameterError(const std::string& what) : Error(what) {}
};

// A matrix that must be symmetric positive definite is not.
struct DefinitenessError : ParameterError {
  explicit DefinitenessError(const std::string& what) : ParameterError(what) {}
};

// Inconsistent vector/matrix dimensions between collaborating objects.
struct ShapeError : Error {
  explicit ShapeError(const std::string& what) : Error(what) {}
};

// A configuration that is valid input but outside the supported model class
// (e.g. non-diagonal mass matrix where the diagonal restriction applies).
struct UnsupportedError : ParameterError {
  explicit UnsupportedError(const std::string& what) : ParameterError(what) {}
};

// Newton non-convergence or a singular linear solve during time stepping.
// Maps to CLI exit code 3. Carries the failing step and last residual norm.
struct SolverError : Error {
  int step_index;
  double last_residual;
  SolverError(const std::string& what, int step, double residual)
      : Error(what), step_index(step), last_residual(residual) {}
};

}  // namespace igeb
