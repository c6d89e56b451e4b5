// vstates -- typed failure modes of the numerical pipeline.
//
// Every throwing failure the library can produce has a named exception type so
// callers (and tests) can react to specific conditions instead of parsing
// message strings. Statuses that are expected outcomes of an algorithm (e.g. a
// Newton solve running out of iterations) are reported through result structs,
// not exceptions.

#pragma once

#include <stdexcept>
#include <string>

namespace vstates {

/// Base class for all numerical failures raised by the core library.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Two distinct quadrature nodes were mapped to (numerically) the same image
/// point, so a secant denominator underflowed. Indicates a self-intersecting
/// or catastrophically under-resolved trace.
class SingularSecantError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

/// The trace derivative vanished somewhere on the grid; the map is no longer
/// conformal at this resolution.
class DegenerateDerivativeError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

/// |phi| underflowed on the contour; polar quantities are undefined.
class ZeroModulusError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

/// A winding-number computation met a node-to-node argument jump too large to
/// resolve unambiguously on this grid.
class UnresolvedWindingError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

/// The boundary coefficient passed to the reconstruction vanished somewhere on
/// the contour, so its phase is undefined.
class ZeroOnContourError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

/// The boundary coefficient has nonzero winding; the phase reconstruction
/// hypothesis is violated.
class WindingNonzeroError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

/// A field evaluation was requested inside the ill-conditioned collar around
/// the patch boundary and no corrected path was available.
class TooCloseToBoundaryError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

/// Adaptive quadrature stopped improving before reaching its tolerance.
class QuadratureStallError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

/// A root bracket could not be established for a 1-D solve.
class NoBracketError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

/// A pointwise Newton iteration (critical-point search) diverged.
class NewtonDivergedError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

/// A residual/operator evaluation failed inside an outer algorithm.
class EvaluationFailureError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

/// Not enough data points to perform a requested fit or check.
class InsufficientDataError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

/// Configuration file / run configuration is invalid.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A persisted artifact declares a schema version this build does not handle.
class SchemaMismatchError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace vstates
