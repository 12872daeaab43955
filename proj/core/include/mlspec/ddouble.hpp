#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <string>

namespace mlspec {

// Error-free transforms. These require strict per-operation IEEE double
// rounding; the build disables fp contraction for every target that
// includes this header.
namespace eft {

inline void two_sum(double a, double b, double& s, double& e) {
  s = a + b;
  double bb = s - a;
  e = (a - (s - bb)) + (b - bb);
}

// Requires |a| >= |b| (or a == 0).
inline void quick_two_sum(double a, double b, double& s, double& e) {
  s = a + b;
  e = b - (s - a);
}

inline void two_prod(double a, double b, double& p, double& e) {
  p = a * b;
  e = std::fma(a, b, -p);
}

}  // namespace eft

/// Unevaluated sum of two doubles (hi + lo, |lo| <= ulp(hi)/2).
/// Roughly 31 significant decimal digits; basic operations are
/// accurate to better than 2^-100 relative.
struct DDouble {
  double hi = 0.0;
  double lo = 0.0;

  constexpr DDouble() = default;
  constexpr DDouble(double h) : hi(h), lo(0.0) {}
  constexpr DDouble(double h, double l) : hi(h), lo(l) {}
};

inline double to_double(DDouble a) { return a.hi; }

inline DDouble operator-(DDouble a) { return {-a.hi, -a.lo}; }

inline DDouble operator+(DDouble a, DDouble b) {
  double s1, s2, t1, t2;
  eft::two_sum(a.hi, b.hi, s1, s2);
  eft::two_sum(a.lo, b.lo, t1, t2);
  s2 += t1;
  eft::quick_two_sum(s1, s2, s1, s2);
  s2 += t2;
  eft::quick_two_sum(s1, s2, s1, s2);
  return {s1, s2};
}

inline DDouble operator+(DDouble a, double b) {
  double s1, s2;
  eft::two_sum(a.hi, b, s1, s2);
  s2 += a.lo;
  eft::quick_two_sum(s1, s2, s1, s2);
  return {s1, s2};
}

inline DDouble operator+(double a, DDouble b) { return b + a; }

inline DDouble operator-(DDouble a, DDouble b) { return a + (-b); }
inline DDouble operator-(DDouble a, double b) { return a + (-b); }
inline DDouble operator-(double a, DDouble b) { return (-b) + a; }

inline DDouble operator*(DDouble a, DDouble b) {
  double p1, p2;
  eft::two_prod(a.hi, b.hi, p1, p2);
  p2 += a.hi * b.lo + a.lo * b.hi;
  eft::quick_two_sum(p1, p2, p1, p2);
  return {p1, p2};
}

inline DDouble operator*(DDouble a, double b) {
  double p1, p2;
  eft::two_prod(a.hi, b, p1, p2);
  p2 += a.lo * b;
  eft::quick_two_sum(p1, p2, p1, p2);
  return {p1, p2};
}

inline DDouble operator*(double a, DDouble b) { return b * a; }

inline DDouble operator/(DDouble a, DDouble b) {
  double q1 = a.hi / b.hi;
  DDouble r = a - b * q1;
  double q2 = r.hi / b.hi;
  r = r - b * q2;
  double q3 = r.hi / b.hi;
  double s, e;
  eft::quick_two_sum(q1, q2, s, e);
  return DDouble{s, e} + q3;
}

inline DDouble operator/(DDouble a, double b) { return a / DDouble(b); }
inline DDouble operator/(double a, DDouble b) { return DDouble(a) / b; }

inline DDouble& operator+=(DDouble& a, DDouble b) { return a = a + b; }
inline DDouble& operator-=(DDouble& a, DDouble b) { return a = a - b; }
inline DDouble& operator*=(DDouble& a, DDouble b) { return a = a * b; }
inline DDouble& operator/=(DDouble& a, DDouble b) { return a = a / b; }

inline bool operator==(DDouble a, DDouble b) { return a.hi == b.hi && a.lo == b.lo; }
inline bool operator!=(DDouble a, DDouble b) { return !(a == b); }
inline bool operator<(DDouble a, DDouble b) {
  return a.hi < b.hi || (a.hi == b.hi && a.lo < b.lo);
}
inline bool operator>(DDouble a, DDouble b) { return b < a; }
inline bool operator<=(DDouble a, DDouble b) { return !(b < a); }
inline bool operator>=(DDouble a, DDouble b) { return !(a < b); }

inline DDouble abs(DDouble a) { return a.hi < 0.0 || (a.hi == 0.0 && a.lo < 0.0) ? -a : a; }

inline DDouble ldexp(DDouble a, int n) { return {std::ldexp(a.hi, n), std::ldexp(a.lo, n)}; }

/// Multiply by an exact power of two.
inline DDouble mul_pwr2(DDouble a, double p) { return {a.hi * p, a.lo * p}; }

inline DDouble floor(DDouble a) {
  double f = std::floor(a.hi);
  if (f != a.hi) return {f, 0.0};
  double g = std::floor(a.lo);
  double s, e;
  eft::quick_two_sum(f, g, s, e);
  return {s, e};
}

inline DDouble round_nearest(DDouble a) {
  double f = std::nearbyint(a.hi);
  if (f != a.hi) {
    if (std::fabs(f - a.hi) == 0.5) {
      // hi sits exactly on a half-integer: the tail decides the side.
      if (a.lo > 0.0 && f < a.hi) f += 1.0;
      if (a.lo < 0.0 && f > a.hi) f -= 1.0;
    }
    return {f, 0.0};
  }
  double g = std::nearbyint(a.lo);
  double s, e;
  eft::quick_two_sum(f, g, s, e);
  return {s, e};
}

inline bool isfinite(DDouble a) { return std::isfinite(a.hi); }

inline DDouble sqrt(DDouble a) {
  if (a.hi == 0.0 && a.lo == 0.0) return {0.0, 0.0};
  if (a.hi < 0.0) return {std::numeric_limits<double>::quiet_NaN(), 0.0};
  // Double seed, one refinement (Karp's trick keeps it to one division-free step).
  double x = 1.0 / std::sqrt(a.hi);
  double ax = a.hi * x;
  DDouble err = a - DDouble(ax) * DDouble(ax);
  double s, e;
  eft::quick_two_sum(ax, err.hi * (x * 0.5), s, e);
  return {s, e};
}

inline constexpr DDouble dd_pi{3.141592653589793116e+00, 1.224646799147353207e-16};
inline constexpr DDouble dd_two_pi{6.283185307179586232e+00, 2.449293598294706414e-16};
inline constexpr DDouble dd_half_pi{1.570796326794896558e+00, 6.123233995736766036e-17};
inline constexpr DDouble dd_ln2{6.931471805599452862e-01, 2.319046813846299558e-17};

// Transcendental kernels (defined in ddouble.cpp).
DDouble sin(DDouble a);
DDouble cos(DDouble a);
void sincos(DDouble a, DDouble& s, DDouble& c);
DDouble exp(DDouble a);
DDouble log(DDouble a);
DDouble atan2(DDouble y, DDouble x);
DDouble asin(DDouble a);

/// Scientific-notation string with `digits` significant digits (default 32).
std::string to_string(DDouble a, int digits = 32);

/// Parse a decimal string; round trip through to_string is lossless to
/// well under 1e-28 relative.
DDouble parse_ddouble(std::string const& text);

}  // namespace mlspec
