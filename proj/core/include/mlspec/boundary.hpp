#pragma once

#include <vector>

#include "mlspec/domain.hpp"
#include "mlspec/linalg.hpp"
#include "mlspec/scalar.hpp"

namespace mlspec {

/// Cumulative integral of a smooth 2pi-periodic function, stored as a
/// truncated Fourier series of the integrand.  cumulative() is exact on the
/// lift: cumulative(t + 2pi) - cumulative(t) == total().
template <class S>
struct PeriodicIntegral {
  S mean{};             // average value of the integrand
  std::vector<S> ac;    // cos-mode k coefficient at index k-1
  std::vector<S> bs;    // sin-mode k coefficient at index k-1

  S total() const { return two_pi_const<S>() * mean; }
  S cumulative(S theta) const;
};

/// Boundary point reported by arclength lookup.
template <class S>
struct BoundarySample {
  S theta;
  S s;
  Vec2<S> point;
  Vec2<S> unit_tangent;
  S curvature;
};

/// A strictly convex planar curve in polar form r(theta), oriented
/// counterclockwise.  Construction certifies positivity of the radius and of
/// the curvature on a fine sample grid (with a continuity margin) and throws
/// NotStrictlyConvex otherwise.
///
/// All angle arguments accept lifted values; every method is pure and the
/// object is immutable after construction, so instances may be shared across
/// threads.
template <class S>
class Boundary {
 public:
  explicit Boundary(DomainSpec const& spec);

  DomainSpec const& spec() const { return spec_; }

  /// r, dr/dtheta, d2r/dtheta2 in one call.
  void radius3(S theta, S& r, S& dr, S& ddr) const;
  S radius(S theta) const;

  Vec2<S> position(S theta) const;
  /// gamma(theta_to) - gamma(theta_from), accurate for nearby endpoints
  /// (computed from difference identities, never by cancelling positions).
  Vec2<S> position_diff(S theta_from, S theta_to) const;
  /// d gamma / d theta (not unit length).
  Vec2<S> derivative(S theta) const;
  Vec2<S> unit_tangent(S theta) const;
  /// |d gamma / d theta| = ds/dtheta, always positive.
  S speed(S theta) const;
  S speed_derivative(S theta) const;
  /// Curvature of the curve, positive by the convexity certificate.
  S curvature(S theta) const;

  S perimeter() const { return arc_.total(); }
  /// Lifted arclength: s(theta + 2pi) = s(theta) + perimeter().
  S arclength_of_angle(S theta) const { return arc_.cumulative(theta); }
  S angle_of_arclength(S s) const;
  BoundarySample<S> evaluate(S s) const;

  /// Cumulative integral of curvature^(2/3) by arclength, and its total.
  S adapted_total() const { return laz_.total(); }
  S adapted_of_angle(S theta) const { return laz_.cumulative(theta); }

  double min_curvature() const { return kappa_min_; }
  double max_curvature() const { return kappa_max_; }

 private:
  void certify();

  DomainSpec spec_;
  DomainKind kind_;
  S circle_r_{};
  S ea_{}, eb_{}, eD_{};  // ellipse: semi-axes and a^2 - b^2
  S base_{};              // fourier constant term
  std::vector<S> ck_, sk_;
  PeriodicIntegral<S> arc_;
  PeriodicIntegral<S> laz_;
  double kappa_min_ = 0.0;
  double kappa_max_ = 0.0;
};

extern template class Boundary<double>;
extern template class Boundary<DDouble>;
extern template struct PeriodicIntegral<double>;
extern template struct PeriodicIntegral<DDouble>;

}  // namespace mlspec
