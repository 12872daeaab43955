#pragma once

#include <stdexcept>
#include <string>

namespace mlspec {

/// Base class for all library failures; what() names the failing stage.
class Error : public std::runtime_error {
 public:
  explicit Error(std::string const& msg) : std::runtime_error(msg) {}
};

/// Linear system pivot or denominator below the working-precision floor.
class SingularSystem : public Error {
 public:
  using Error::Error;
};

/// Eigen decomposition requested for a matrix with |trace| <= 2.
class NotHyperbolic : public Error {
 public:
  using Error::Error;
};

/// Line fit abscissae span too small to determine a slope.
class DegenerateAbscissae : public Error {
 public:
  using Error::Error;
};

/// Domain parameters violate the schema (missing keys, bad ranges).
class InvalidSpec : public Error {
 public:
  using Error::Error;
};

/// Curvature check failed: the boundary is not strictly convex.
class NotStrictlyConvex : public Error {
 public:
  using Error::Error;
};

/// Chord endpoints coincide (or nearly so); partials undefined.
class DegenerateChord : public Error {
 public:
  using Error::Error;
};

/// Reflection angle within the grazing guard of 0 or pi.
class GrazingOrbit : public Error {
 public:
  using Error::Error;
};

/// Mixed second partial of the generating function vanished.
class TwistDegenerate : public Error {
 public:
  using Error::Error;
};

/// Newton iteration exhausted its budget without meeting tolerance.
class NoConvergence : public Error {
 public:
  using Error::Error;
};

/// Configuration monotonicity lost and not restorable by damping.
class OrderingViolated : public Error {
 public:
  using Error::Error;
};

/// A sequence that must be monotone (convexity quotients) is not.
class MonotonicityViolated : public Error {
 public:
  using Error::Error;
};

/// Extrapolation did not settle (increments not contracting).
class NonConvergent : public Error {
 public:
  using Error::Error;
};

/// Too few usable points for the requested fit.
class InsufficientWindow : public Error {
 public:
  using Error::Error;
};

/// Run configuration rejected (unknown keys, invalid values).
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace mlspec
