#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

#include "mlspec/errors.hpp"
#include "mlspec/scalar.hpp"

namespace mlspec {

template <class S>
struct Extrapolated {
  S value{};
  S error{};  // magnitude of the last correction, a crude error gauge
};

/// One Aitken delta-squared pass; n inputs yield n-2 accelerated values.
/// Entries whose second difference is flat to working precision pass through
/// unchanged instead of dividing by noise.
template <class S>
std::vector<S> aitken_pass(std::vector<S> const& v) {
  std::vector<S> out;
  if (v.size() < 3) return out;
  out.reserve(v.size() - 2);
  for (size_t k = 0; k + 2 < v.size(); ++k) {
    S d1 = v[k + 1] - v[k];
    S d2 = v[k + 2] - v[k + 1];
    S den = d2 - d1;
    double scale = std::max({std::fabs(to_double(v[k])), std::fabs(to_double(v[k + 2])), 1.0});
    if (std::fabs(to_double(den)) <= 8.0 * ScalarTraits<S>::epsilon() * scale) {
      out.push_back(v[k + 2]);
    } else {
      out.push_back(v[k + 2] - d2 * (d2 / den));
    }
  }
  return out;
}

/// Iterated Aitken acceleration for sequences with geometric error decay.
/// Passes are applied while they keep shrinking the latest correction; the
/// first pass that moves the estimate by more than the standing error gauge
/// is rejected, so noise plateaus terminate cleanly.
template <class S>
Extrapolated<S> iterated_aitken(std::vector<S> stage) {
  if (stage.empty()) throw ConfigError("iterated_aitken: empty sequence");
  Extrapolated<S> out;
  out.value = stage.back();
  out.error = stage.size() >= 2 ? stage.back() - stage[stage.size() - 2] : S(0.0);
  while (stage.size() >= 3) {
    std::vector<S> next = aitken_pass(stage);
    S delta = next.back() - out.value;
    if (std::fabs(to_double(delta)) > std::fabs(to_double(out.error))) break;
    out.value = next.back();
    out.error = delta;
    stage = std::move(next);
  }
  return out;
}

/// Polynomial extrapolation to zero: the Neville tableau for the unique
/// polynomial through (xs[i], ys[i]), evaluated at x = 0.  The nodes must be
/// distinct and nonzero.
template <class S>
Extrapolated<S> neville_zero(std::vector<S> const& xs, std::vector<S> ys) {
  size_t n = ys.size();
  if (n == 0 || xs.size() != n) throw ConfigError("neville_zero: node/value size mismatch");
  S prev = ys[0];
  for (size_t m = 1; m < n; ++m) {
    prev = ys[0];
    for (size_t i = 0; i + m < n; ++i) {
      S den = xs[i] - xs[i + m];
      if (to_double(den) == 0.0) throw ConfigError("neville_zero: repeated node");
      ys[i] = (xs[i] * ys[i + 1] - xs[i + m] * ys[i]) / den;
    }
  }
  Extrapolated<S> out;
  out.value = ys[0];
  out.error = n >= 2 ? ys[0] - prev : S(0.0);
  return out;
}

/// Least-squares line y = a + b x; returns (intercept, slope).
inline std::pair<double, double> fit_line(std::vector<double> const& x,
                                          std::vector<double> const& y) {
  if (x.size() != y.size() || x.size() < 2) throw ConfigError("fit_line: need two points");
  double n = double(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  double den = n * sxx - sx * sx;
  if (den == 0.0) throw ConfigError("fit_line: degenerate abscissae");
  double slope = (n * sxy - sx * sy) / den;
  double intercept = (sy - slope * sx) / n;
  return {intercept, slope};
}

}  // namespace mlspec
