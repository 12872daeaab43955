#pragma once

#include <cmath>
#include <cstdio>
#include <string>

#include "mlspec/ddouble.hpp"

namespace mlspec {

enum class Precision { Double, Extended };

inline char const* precision_name(Precision p) {
  return p == Precision::Double ? "double" : "extended";
}

template <class S>
struct ScalarTraits;

template <>
struct ScalarTraits<double> {
  static constexpr double epsilon() { return 2.220446049250313e-16; }  // 2^-52
  static constexpr int digits10 = 17;
  static constexpr Precision precision = Precision::Double;
};

template <>
struct ScalarTraits<DDouble> {
  // Contract accuracy of the paired-double operations, not the raw
  // representable resolution.
  static constexpr double epsilon() { return 7.888609052210118e-31; }  // 2^-100
  static constexpr int digits10 = 32;
  static constexpr Precision precision = Precision::Extended;
};

// double counterparts of the DDouble free functions, so templated code
// can call them unqualified for either scalar.
inline double to_double(double x) { return x; }
inline void sincos(double a, double& s, double& c) {
  s = std::sin(a);
  c = std::cos(a);
}
inline double round_nearest(double a) { return std::nearbyint(a); }
inline double mul_pwr2(double a, double p) { return a * p; }
inline double sqrt(double x) { return std::sqrt(x); }
inline double exp(double x) { return std::exp(x); }
inline double log(double x) { return std::log(x); }
inline double atan2(double y, double x) { return std::atan2(y, x); }
inline double asin(double x) { return std::asin(x); }
inline double abs(double x) { return std::fabs(x); }
inline double floor(double x) { return std::floor(x); }

template <class S>
S from_double(double x) {
  return S(x);
}

template <class S>
S pi_const();
template <>
inline double pi_const<double>() {
  return 3.141592653589793;
}
template <>
inline DDouble pi_const<DDouble>() {
  return dd_pi;
}

template <class S>
S two_pi_const();
template <>
inline double two_pi_const<double>() {
  return 6.283185307179586;
}
template <>
inline DDouble two_pi_const<DDouble>() {
  return dd_two_pi;
}

inline std::string format_scalar(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

inline std::string format_scalar(DDouble x) { return to_string(x, 32); }

}  // namespace mlspec
