#pragma once

#include <stdexcept>
#include <string>

namespace lppl {

/// Base of every exception thrown by the library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Inputs that disagree on the lattice dimension or on local Hilbert space sizes.
class DimensionError : public Error {
public:
  using Error::Error;
};

/// A set-inclusion or support precondition was violated.
class GeometryError : public Error {
public:
  using Error::Error;
};

/// Physical validation failed: non-Hermitian input, missing gap, degenerate
/// on-site ground state, interaction outside its range ball.
class ValidationError : public Error {
public:
  using Error::Error;
};

/// A dense fallback was requested above the configured dimension cap.
class CapacityError : public Error {
public:
  using Error::Error;
};

/// Iterative eigensolver failure; carries the best residual reached.
class SolverError : public Error {
public:
  SolverError(const std::string& what, double best_residual)
      : Error(what), best_residual_(best_residual) {}

  double best_residual() const noexcept { return best_residual_; }

private:
  double best_residual_;
};

} // namespace lppl
