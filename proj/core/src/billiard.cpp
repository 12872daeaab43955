#include "mlspec/billiard.hpp"

#include <cmath>
#include <string>
#include <type_traits>
#include <utility>

#include "mlspec/errors.hpp"

namespace mlspec {
namespace {

template <class S>
S cbrt_pos(S v) {
  if constexpr (std::is_same_v<S, double>) {
    return std::cbrt(v);
  } else {
    S y = from_double<S>(std::cbrt(to_double(v)));
    // One Newton step lifts the double seed to full working accuracy.
    S y2 = y * y;
    return y - (y2 * y - v) / (mul_pwr2(y2, 2.0) + y2);
  }
}

}  // namespace

template <class S>
ChordData<S> chord(Boundary<S> const& b, S theta_from, S theta_to) {
  Vec2<S> diff = b.position_diff(theta_from, theta_to);
  S len = norm(diff);
  double floor = 32.0 * ScalarTraits<S>::epsilon() * to_double(b.perimeter());
  if (!(to_double(len) > floor))
    throw DegenerateChord("chord: endpoints " + format_scalar(theta_from) + " and " +
                          format_scalar(theta_to) + " coincide (length " +
                          format_scalar(len) + ")");
  S inv_len = S(1.0) / len;
  Vec2<S> u = inv_len * diff;
  Vec2<S> tf = b.unit_tangent(theta_from);
  Vec2<S> tt = b.unit_tangent(theta_to);

  ChordData<S> cd;
  cd.length = len;
  cd.cos_out = dot(tf, u);
  cd.sin_out = cross(tf, u);
  cd.cos_in = dot(tt, u);
  cd.sin_in = S(0.0) - cross(tt, u);
  cd.d1 = -cd.cos_out;
  cd.d2 = cd.cos_in;
  cd.d11 = cd.sin_out * (cd.sin_out * inv_len - b.curvature(theta_from));
  cd.d22 = cd.sin_in * (cd.sin_in * inv_len - b.curvature(theta_to));
  cd.d12 = cd.sin_out * cd.sin_in * inv_len;
  return cd;
}

template <class S>
StepResult<S> step(Boundary<S> const& b, S theta, S phi) {
  if (!(S(0.0) < phi) || !(phi < pi_const<S>()))
    throw GrazingOrbit("step: departure angle " + format_scalar(phi) +
                       " outside (0, pi)");

  Vec2<S> t = b.unit_tangent(theta);
  S sp, cp;
  sincos(phi, sp, cp);
  Vec2<S> dir = cp * t + sp * perp(t);

  // side(x) = cross(dir, gamma(x) - gamma(theta)) is negative just past theta,
  // positive just below theta + 2 pi, and crosses zero exactly once between:
  // the ray's line meets a strictly convex boundary at two points only.
  double eps = ScalarTraits<S>::epsilon();
  auto side = [&](S x, double& noise) {
    Vec2<S> d = b.position_diff(theta, x);
    noise = 8.0 * eps *
            (std::fabs(to_double(d.x)) + std::fabs(to_double(d.y)) + 1e-30);
    return cross(dir, d);
  };

  S two_pi = two_pi_const<S>();
  S lo = theta;           // sentinel: side -> 0^- here, never evaluated
  S hi = theta + two_pi;  // sentinel: side -> 0^+ here, never evaluated
  constexpr int kScan = 64;
  double noise = 0.0;
  for (int k = 1; k < kScan; ++k) {
    S x = theta + two_pi * S(k / double(kScan));
    S f = side(x, noise);
    if (f < S(0.0)) {
      lo = x;
    } else {
      hi = x;
      break;
    }
  }

  double tol = 4.0 * eps * (std::fabs(to_double(theta)) + 6.3);
  S x = mul_pwr2(lo + hi, 0.5);
  bool converged = false;
  for (int it = 0; it < 220 && !converged; ++it) {
    S f = side(x, noise);
    // Within the rounding floor of the side function x is indistinguishable
    // from the crossing; a Newton correction from such an f is itself noise.
    if (std::fabs(to_double(f)) <= noise) {
      converged = true;
      break;
    }
    if (f < S(0.0)) {
      lo = x;
    } else {
      hi = x;
    }
    S fp = cross(dir, b.derivative(x));
    S xn;
    bool newton_ok = to_double(abs(fp)) > 1e-300;
    if (newton_ok) {
      xn = x - f / fp;
      newton_ok = lo < xn && xn < hi;
    }
    if (!newton_ok) xn = mul_pwr2(lo + hi, 0.5);
    converged = to_double(abs(xn - x)) <= tol;
    x = xn;
  }
  if (!converged)
    throw NoConvergence("step: exit search stalled from theta = " + format_scalar(theta) +
                        ", phi = " + format_scalar(phi));

  ChordData<S> cd = chord(b, theta, x);
  if (!(to_double(cd.sin_in) > 0.0))
    throw GrazingOrbit("step: arrival at " + format_scalar(x) + " is tangent");
  return {x, atan2(cd.sin_in, cd.cos_in), cd};
}

template <class S>
StepResult<S> unstep(Boundary<S> const& b, S theta, S phi) {
  // Reversing a chord swaps its endpoint angles with pi minus them, so the
  // preimage is found by stepping forward at the supplementary angle.
  StepResult<S> rev = step(b, theta, pi_const<S>() - phi);
  S theta_prev = rev.theta_next - two_pi_const<S>();
  ChordData<S> cd = chord(b, theta_prev, theta);
  return {theta_prev, pi_const<S>() - rev.phi_next, cd};
}

template <class S>
Mat2<S> jacobian(Boundary<S> const& b, S theta_from, S theta_to) {
  ChordData<S> cd = chord(b, theta_from, theta_to);
  double twist = to_double(cd.d12);
  if (!(twist > 1e-12))
    throw TwistDegenerate("jacobian: mixed length partial " + std::to_string(twist) +
                          " has collapsed (grazing chord)");
  S inv = S(1.0) / cd.d12;
  Mat2<S> j;
  j.a = -cd.d11 * inv;
  j.b = inv;
  j.c = (cd.d11 * cd.d22 - cd.d12 * cd.d12) * inv;
  j.d = -cd.d22 * inv;
  return j;
}

Mat2<double> jacobian_fd(Boundary<double> const& b, double theta_from, double theta_to,
                         double h) {
  ChordData<double> cd = chord(b, theta_from, theta_to);
  double s0 = b.arclength_of_angle(theta_from);
  double r0 = -cd.cos_out;
  auto image = [&](double s, double r) {
    StepResult<double> st = step(b, b.angle_of_arclength(s), std::acos(-r));
    return std::pair<double, double>{b.arclength_of_angle(st.theta_next),
                                     -std::cos(st.phi_next)};
  };
  auto [sp, rp] = image(s0 + h, r0);
  auto [sm, rm] = image(s0 - h, r0);
  auto [sq, rq] = image(s0, r0 + h);
  auto [sn, rn] = image(s0, r0 - h);
  double inv2h = 1.0 / (2.0 * h);
  return {(sp - sm) * inv2h, (sq - sn) * inv2h, (rp - rm) * inv2h, (rq - rn) * inv2h};
}

template <class S>
AdaptedPoint<S> adapted_point(Boundary<S> const& b, S theta, S phi) {
  S inv_total = S(1.0) / b.adapted_total();
  S sh, ch;
  sincos(mul_pwr2(phi, 0.5), sh, ch);
  AdaptedPoint<S> p;
  p.x = b.adapted_of_angle(theta) * inv_total;
  p.y = S(4.0) * sh * inv_total / cbrt_pos(b.curvature(theta));
  return p;
}

template ChordData<double> chord(Boundary<double> const&, double, double);
template ChordData<DDouble> chord(Boundary<DDouble> const&, DDouble, DDouble);
template StepResult<double> step(Boundary<double> const&, double, double);
template StepResult<DDouble> step(Boundary<DDouble> const&, DDouble, DDouble);
template StepResult<double> unstep(Boundary<double> const&, double, double);
template StepResult<DDouble> unstep(Boundary<DDouble> const&, DDouble, DDouble);
template Mat2<double> jacobian(Boundary<double> const&, double, double);
template Mat2<DDouble> jacobian(Boundary<DDouble> const&, DDouble, DDouble);
template AdaptedPoint<double> adapted_point(Boundary<double> const&, double, double);
template AdaptedPoint<DDouble> adapted_point(Boundary<DDouble> const&, DDouble, DDouble);

}  // namespace mlspec
