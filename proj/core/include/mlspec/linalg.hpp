#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "mlspec/errors.hpp"
#include "mlspec/scalar.hpp"

namespace mlspec {

template <class S>
struct Vec2 {
  S x{}, y{};
};

template <class S>
Vec2<S> operator+(Vec2<S> a, Vec2<S> b) {
  return {a.x + b.x, a.y + b.y};
}
template <class S>
Vec2<S> operator-(Vec2<S> a, Vec2<S> b) {
  return {a.x - b.x, a.y - b.y};
}
template <class S>
Vec2<S> operator-(Vec2<S> a) {
  return {-a.x, -a.y};
}
template <class S>
Vec2<S> operator*(S c, Vec2<S> a) {
  return {c * a.x, c * a.y};
}
template <class S>
S dot(Vec2<S> a, Vec2<S> b) {
  return a.x * b.x + a.y * b.y;
}
template <class S>
S cross(Vec2<S> a, Vec2<S> b) {
  return a.x * b.y - a.y * b.x;
}
template <class S>
S norm(Vec2<S> a) {
  using std::sqrt;
  return sqrt(dot(a, a));
}
/// Rotate by +90 degrees (counterclockwise).
template <class S>
Vec2<S> perp(Vec2<S> a) {
  return {-a.y, a.x};
}

/// Row-major 2x2 matrix [[a, b], [c, d]].
template <class S>
struct Mat2 {
  S a{}, b{}, c{}, d{};

  static Mat2 identity() { return {S(1.0), S(0.0), S(0.0), S(1.0)}; }
};

template <class S>
Mat2<S> operator*(Mat2<S> const& m, Mat2<S> const& n) {
  return {m.a * n.a + m.b * n.c, m.a * n.b + m.b * n.d,
          m.c * n.a + m.d * n.c, m.c * n.b + m.d * n.d};
}
template <class S>
Vec2<S> operator*(Mat2<S> const& m, Vec2<S> v) {
  return {m.a * v.x + m.b * v.y, m.c * v.x + m.d * v.y};
}
template <class S>
S trace(Mat2<S> const& m) {
  return m.a + m.d;
}
template <class S>
S det(Mat2<S> const& m) {
  return m.a * m.d - m.b * m.c;
}

template <class S>
struct EigenPair {
  S lambda_small{};       // |lambda_small| <= |lambda_big|
  S lambda_big{};
  Vec2<S> v_small{};      // unit eigenvectors, x >= 0 (y > 0 if x == 0)
  Vec2<S> v_big{};
};

namespace detail {

template <class S>
Vec2<S> unit_eigenvector(Mat2<S> const& m, S lambda) {
  using std::fabs;
  // Rows of (M - lambda I) are both orthogonal to the eigenvector; pick
  // the better conditioned null direction.
  Vec2<S> cand1{m.b, lambda - m.a};
  Vec2<S> cand2{lambda - m.d, m.c};
  double n1 = std::fabs(to_double(cand1.x)) + std::fabs(to_double(cand1.y));
  double n2 = std::fabs(to_double(cand2.x)) + std::fabs(to_double(cand2.y));
  Vec2<S> v = n1 >= n2 ? cand1 : cand2;
  S len = norm(v);
  v = {v.x / len, v.y / len};
  double vx = to_double(v.x);
  if (vx < 0.0 || (vx == 0.0 && to_double(v.y) < 0.0)) v = -v;
  return v;
}

}  // namespace detail

/// Eigen decomposition of a (near-)unimodular hyperbolic 2x2 matrix.
/// Throws NotHyperbolic when |trace| <= 2 + 1e-10.
template <class S>
EigenPair<S> eigen2(Mat2<S> const& m) {
  using std::sqrt;
  S tr = trace(m);
  S dt = det(m);
  double trd = to_double(tr);
  if (std::fabs(trd) <= 2.0 + 1e-10) {
    throw NotHyperbolic("eigen2: |trace| = " + std::to_string(std::fabs(trd)) +
                        " is not above 2");
  }
  S disc = tr * tr - 4.0 * dt;
  S root = sqrt(disc);
  // Add the root to the trace's sign to avoid cancellation, then get the
  // other eigenvalue from the determinant.
  S big = trd >= 0.0 ? mul_pwr2(tr + root, 0.5) : mul_pwr2(tr - root, 0.5);
  S small = dt / big;
  EigenPair<S> out;
  out.lambda_big = big;
  out.lambda_small = small;
  out.v_big = detail::unit_eigenvector(m, big);
  out.v_small = detail::unit_eigenvector(m, small);
  return out;
}

/// Symmetric tridiagonal matrix: diag has n entries, off has n-1
/// (off[i] couples i and i+1).
template <class S>
struct SymTridiagonal {
  std::vector<S> diag;
  std::vector<S> off;
};

/// Symmetric cyclic tridiagonal matrix: off has n entries and off[n-1]
/// couples index n-1 back to 0. For n == 2 both off entries couple the
/// same pair, so the dense coupling is their sum.
template <class S>
struct CyclicTridiagonal {
  std::vector<S> diag;
  std::vector<S> off;
};

namespace detail {

template <class S>
double tridiag_scale(std::vector<S> const& diag, std::vector<S> const& off) {
  double s = 0.0;
  for (auto const& v : diag) s = std::max(s, std::fabs(to_double(v)));
  for (auto const& v : off) s = std::max(s, std::fabs(to_double(v)));
  return s;
}

}  // namespace detail

/// Thomas elimination; throws SingularSystem when a pivot falls under
/// the working-precision floor.
template <class S>
std::vector<S> solve_sym_tridiagonal(SymTridiagonal<S> const& m, std::vector<S> const& rhs) {
  size_t n = m.diag.size();
  if (n == 0 || m.off.size() + 1 != n || rhs.size() != n) {
    throw std::invalid_argument("solve_sym_tridiagonal: shape mismatch");
  }
  double scale = detail::tridiag_scale(m.diag, m.off);
  double piv_tol = 64.0 * ScalarTraits<S>::epsilon() * std::max(scale, 1e-300);

  std::vector<S> c(n, S(0.0)), d(n, S(0.0)), x(n, S(0.0));
  S piv = m.diag[0];
  if (std::fabs(to_double(piv)) <= piv_tol) throw SingularSystem("solve_sym_tridiagonal: zero pivot at row 0");
  c[0] = m.off.empty() ? S(0.0) : m.off[0] / piv;
  d[0] = rhs[0] / piv;
  for (size_t i = 1; i < n; ++i) {
    piv = m.diag[i] - m.off[i - 1] * c[i - 1];
    if (std::fabs(to_double(piv)) <= piv_tol) {
      throw SingularSystem("solve_sym_tridiagonal: zero pivot at row " + std::to_string(i));
    }
    if (i + 1 < n) c[i] = m.off[i] / piv;
    d[i] = (rhs[i] - m.off[i - 1] * d[i - 1]) / piv;
  }
  x[n - 1] = d[n - 1];
  for (size_t i = n - 1; i-- > 0;) x[i] = d[i] - c[i] * x[i + 1];
  return x;
}

/// Cyclic variant via the rank-one (Sherman-Morrison) correction.
template <class S>
std::vector<S> solve_cyclic_tridiagonal(CyclicTridiagonal<S> const& m, std::vector<S> const& rhs) {
  size_t n = m.diag.size();
  if (n < 2 || m.off.size() != n || rhs.size() != n) {
    throw std::invalid_argument("solve_cyclic_tridiagonal: need n >= 2 with matching shapes");
  }
  double scale = detail::tridiag_scale(m.diag, m.off);
  double tol = 64.0 * ScalarTraits<S>::epsilon() * std::max(scale, 1e-300);

  if (n == 2) {
    S a = m.diag[0], dd = m.diag[1];
    S b = m.off[0] + m.off[1];  // wrap doubles the coupling
    S dt = a * dd - b * b;
    if (std::fabs(to_double(dt)) <= tol * std::max(scale, 1e-300)) {
      throw SingularSystem("solve_cyclic_tridiagonal: singular 2x2 system");
    }
    return {(dd * rhs[0] - b * rhs[1]) / dt, (a * rhs[1] - b * rhs[0]) / dt};
  }

  // A = T + u v^T with u = (gamma, 0, .., w), v = (1, 0, .., w/gamma),
  // where w is the wrap coupling off[n-1].
  S w = m.off[n - 1];
  S gamma = -m.diag[0];
  if (std::fabs(to_double(gamma)) <= tol) gamma = S(std::max(scale, 1.0));
  SymTridiagonal<S> t;
  t.diag = m.diag;
  t.off.assign(m.off.begin(), m.off.end() - 1);
  t.diag[0] = t.diag[0] - gamma;
  t.diag[n - 1] = t.diag[n - 1] - w * w / gamma;

  std::vector<S> u(n, S(0.0));
  u[0] = gamma;
  u[n - 1] = w;

  std::vector<S> y = solve_sym_tridiagonal(t, rhs);
  std::vector<S> z = solve_sym_tridiagonal(t, u);

  S vy = y[0] + w / gamma * y[n - 1];
  S vz = z[0] + w / gamma * z[n - 1];
  S denom = 1.0 + vz;
  if (std::fabs(to_double(denom)) <= 64.0 * ScalarTraits<S>::epsilon() * (1.0 + std::fabs(to_double(vz)))) {
    throw SingularSystem("solve_cyclic_tridiagonal: singular correction step");
  }
  S factor = vy / denom;
  std::vector<S> x(n);
  for (size_t i = 0; i < n; ++i) x[i] = y[i] - factor * z[i];
  return x;
}

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double max_abs_residual = 0.0;
};

/// Ordinary least squares line through (xs, ys).
/// Throws DegenerateAbscissae when the xs span less than 1e-12.
inline LineFit linear_fit(std::vector<double> const& xs, std::vector<double> const& ys) {
  if (xs.size() != ys.size() || xs.size() < 2) {
    throw std::invalid_argument("linear_fit: need at least two matching points");
  }
  double xmin = xs[0], xmax = xs[0];
  for (double x : xs) {
    xmin = std::min(xmin, x);
    xmax = std::max(xmax, x);
  }
  if (xmax - xmin < 1e-12) throw DegenerateAbscissae("linear_fit: abscissae span below 1e-12");
  size_t n = xs.size();
  double mx = 0.0, my = 0.0;
  for (size_t i = 0; i < n; ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= double(n);
  my /= double(n);
  double sxx = 0.0, sxy = 0.0;
  for (size_t i = 0; i < n; ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
  }
  LineFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  for (size_t i = 0; i < n; ++i) {
    fit.max_abs_residual =
        std::max(fit.max_abs_residual, std::fabs(ys[i] - fit.slope * xs[i] - fit.intercept));
  }
  return fit;
}

}  // namespace mlspec
