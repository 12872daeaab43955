#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <quadmath.h>

#include <cmath>
#include <random>
#include <vector>

#include "doctest.h"
#include "mlspec/ddouble.hpp"
#include "mlspec/linalg.hpp"

using namespace mlspec;

namespace {

__float128 wide(DDouble a) { return __float128(a.hi) + __float128(a.lo); }

double rel_err(DDouble got, __float128 want) {
  __float128 d = wide(got) - want;
  __float128 aw = fabsq(want);
  if (aw < __float128(1e-280)) return double(fabsq(d));
  return double(fabsq(d) / aw);
}

// Branching error-free transform, independent of the library's branchless one.
void oracle_two_sum(double x, double y, double& s, double& e) {
  if (std::fabs(x) < std::fabs(y)) std::swap(x, y);
  s = x + y;
  e = y - (s - x);
}

// Exact expansion sum (grow-expansion): value(result) == value(e) + b, always.
std::vector<double> grow_expansion(std::vector<double> const& e, double b) {
  std::vector<double> h;
  double q = b;
  for (double c : e) {
    double s, err;
    oracle_two_sum(q, c, s, err);
    h.push_back(err);
    q = s;
  }
  h.push_back(q);
  return h;
}

// Sum of doubles with zero rounding error, returned as (approx, everything
// it could not absorb stays below the relative precision of the approx).
double exact_sum(std::vector<double> const& vals) {
  std::vector<double> e;
  for (double v : vals) e = grow_expansion(e, v);
  double s = 0.0;
  for (double c : e) s += c;  // components are near-nonoverlapping
  return s;
}

// A paired double with nonzero tail bits, scaled into [10^-3, 10^3).
DDouble random_dd(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::uniform_int_distribution<int> e(-3, 3);
  DDouble x = DDouble(u(rng)) + DDouble(u(rng) * 1e-17);
  return x * std::pow(10.0, e(rng));
}

// Dense Gaussian elimination with partial pivoting; the oracle the
// tridiagonal solvers are checked against.
std::vector<double> dense_solve(std::vector<std::vector<double>> a, std::vector<double> b) {
  size_t n = b.size();
  for (size_t k = 0; k < n; ++k) {
    size_t piv = k;
    for (size_t i = k + 1; i < n; ++i)
      if (std::fabs(a[i][k]) > std::fabs(a[piv][k])) piv = i;
    std::swap(a[k], a[piv]);
    std::swap(b[k], b[piv]);
    if (std::fabs(a[k][k]) < 1e-14) throw SingularSystem("dense oracle: singular");
    for (size_t i = k + 1; i < n; ++i) {
      double f = a[i][k] / a[k][k];
      for (size_t j = k; j < n; ++j) a[i][j] -= f * a[k][j];
      b[i] -= f * b[k];
    }
  }
  std::vector<double> x(n, 0.0);
  for (size_t i = n; i-- > 0;) {
    double s = b[i];
    for (size_t j = i + 1; j < n; ++j) s -= a[i][j] * x[j];
    x[i] = s / a[i][i];
  }
  return x;
}

std::vector<std::vector<double>> cyclic_dense(CyclicTridiagonal<double> const& m) {
  size_t n = m.diag.size();
  std::vector<std::vector<double>> a(n, std::vector<double>(n, 0.0));
  for (size_t i = 0; i < n; ++i) a[i][i] = m.diag[i];
  for (size_t i = 0; i < n; ++i) {
    size_t j = (i + 1) % n;
    a[i][j] += m.off[i];
    a[j][i] += m.off[i];
  }
  return a;
}

}  // namespace

TEST_CASE("paired-double add accuracy contract") {
  // The computed sum stays within 2^-100 relative error of the exact sum,
  // including under heavy cancellation.  A pair can span more mantissa bits
  // than __float128 holds, so the oracle is an exact expansion sum instead.
  std::mt19937_64 rng(12345);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  double const bound = 7.888609052210118e-31;  // 2^-100

  for (int it = 0; it < 20000; ++it) {
    DDouble a, b;
    if (it % 2 == 0) {  // plain-double inputs
      a = DDouble(u(rng) * std::pow(10.0, it % 7 - 3));
      b = (it % 6 == 0) ? DDouble(-a.hi * (1.0 + u(rng) * 1e-12)) : DDouble(u(rng));
    } else {  // full-tail paired inputs
      a = random_dd(rng);
      b = (it % 7 == 1) ? -a * (1.0 + u(rng) * 1e-13) + DDouble(u(rng) * 1e-25)
                        : random_dd(rng);
    }
    DDouble s = a + b;
    double sum = exact_sum({a.hi, a.lo, b.hi, b.lo});
    double defect = exact_sum({a.hi, a.lo, b.hi, b.lo, -s.hi, -s.lo});
    CHECK(std::fabs(defect) <= bound * std::fabs(sum) + 1e-300);
  }
}

TEST_CASE("paired-double field ops against quadmath") {
  std::mt19937_64 rng(777);
  for (int it = 0; it < 5000; ++it) {
    DDouble a = random_dd(rng);
    DDouble b = random_dd(rng);
    CHECK(rel_err(a * b, wide(a) * wide(b)) < 5e-31);
    CHECK(rel_err(a / b, wide(a) / wide(b)) < 5e-31);
    DDouble p = abs(a);
    CHECK(rel_err(sqrt(p), sqrtq(wide(p))) < 1e-30);
  }
}

TEST_CASE("paired-double transcendentals against quadmath") {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> u(-1.0, 1.0);

  for (int it = 0; it < 3000; ++it) {
    // Arguments over the range the solvers use (lifted angles stay below ~1e3).
    DDouble x = DDouble(u(rng) * 400.0) + DDouble(u(rng) * 1e-15);
    DDouble s, c;
    sincos(x, s, c);
    // Absolute tolerance: argument reduction at |x| ~ 400 costs a few times
    // 1e-30 absolutely, which is unbounded relative error near the zeros.
    CHECK(double(fabsq(wide(s) - sinq(wide(x)))) < 3e-29);
    CHECK(double(fabsq(wide(c) - cosq(wide(x)))) < 3e-29);
    CHECK(std::fabs(to_double(s * s + c * c - 1.0)) < 2e-28);
  }

  for (int it = 0; it < 2000; ++it) {
    DDouble y = random_dd(rng);
    DDouble x = random_dd(rng);
    DDouble z = atan2(y, x);
    CHECK(rel_err(z, atan2q(wide(y), wide(x))) < 2e-29);
  }

  for (int it = 0; it < 2000; ++it) {
    DDouble x = abs(random_dd(rng)) + 1e-6;
    // Near x = 1 the log is small and relative error is the wrong yardstick.
    if (std::fabs(to_double(x) - 1.0) > 0.05)
      CHECK(rel_err(log(x), logq(wide(x))) < 2e-29);
    DDouble e = DDouble(u(rng) * 300.0);
    CHECK(rel_err(exp(e), expq(wide(e))) < 1e-28);
  }
  CHECK(rel_err(log(DDouble(2.0)), M_LN2q) < 1e-30);
  CHECK(rel_err(log(exp(DDouble(3.5))), __float128(3.5)) < 1e-29);

  DDouble lo = asin(DDouble(0.5));
  CHECK(rel_err(lo, asinq(__float128(0.5))) < 1e-29);
}

TEST_CASE("paired-double constants") {
  CHECK(double(fabsq(wide(dd_pi) - M_PIq)) < 1e-32);
  CHECK(double(fabsq(wide(dd_two_pi) - 2.0Q * M_PIq)) < 1e-31);
  CHECK(double(fabsq(wide(dd_half_pi) - M_PIq / 2.0Q)) < 1e-32);
  CHECK(double(fabsq(wide(dd_ln2) - M_LN2q)) < 1e-32);
}

TEST_CASE("paired-double decimal round trip") {
  std::mt19937_64 rng(99);
  for (int it = 0; it < 2000; ++it) {
    DDouble x = random_dd(rng);
    DDouble back = parse_ddouble(to_string(x));
    double rel = std::fabs(to_double((back - x) / x));
    CHECK(rel < 1e-28);
  }
  CHECK(to_string(DDouble(0.0)) == to_string(DDouble(0.0)));
  CHECK(parse_ddouble("1.5e2").hi == doctest::Approx(150.0));
  CHECK(parse_ddouble("-0.25").hi == doctest::Approx(-0.25));
}

TEST_CASE("paired-double floor and rounding") {
  CHECK(to_double(floor(DDouble(2.7))) == 2.0);
  CHECK(to_double(floor(DDouble(-2.3))) == -3.0);
  DDouble nearly3 = DDouble(3.0) - DDouble(1e-25);
  CHECK(to_double(floor(nearly3)) == 2.0);
  CHECK(to_double(round_nearest(DDouble(2.5) + DDouble(1e-22))) == 3.0);
}

TEST_CASE("eigen2 fixed cases") {
  Mat2<double> d{0.5, 0.0, 0.0, 2.0};
  auto e = eigen2(d);
  CHECK(e.lambda_small == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(e.lambda_big == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(std::fabs(e.v_small.x) == doctest::Approx(1.0));
  CHECK(std::fabs(e.v_big.y) == doctest::Approx(1.0));

  Mat2<double> m{2.0, 1.0, 1.0, 1.0};
  auto f = eigen2(m);
  double expected = (3.0 - std::sqrt(5.0)) / 2.0;
  CHECK(f.lambda_small == doctest::Approx(expected).epsilon(1e-14));

  Mat2<double> shear{1.0, 1.0, 0.0, 1.0};  // trace exactly 2
  CHECK_THROWS_AS(eigen2(shear), NotHyperbolic);
  Mat2<double> rot{0.0, -1.0, 1.0, 0.0};
  CHECK_THROWS_AS(eigen2(rot), NotHyperbolic);
}

TEST_CASE("eigen2 random hyperbolic unimodular property") {
  std::mt19937_64 rng(31415);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  int done = 0;
  while (done < 1000) {
    // Random SL(2): fix d from a,b,c so the determinant is exactly one.
    double a = u(rng), b = u(rng), c = u(rng);
    if (std::fabs(a) < 0.1) continue;
    double d = (1.0 + b * c) / a;
    Mat2<double> m{a, b, c, d};
    if (std::fabs(trace(m)) <= 2.01) continue;
    auto e = eigen2(m);
    double scale = std::fabs(a) + std::fabs(b) + std::fabs(c) + std::fabs(d);
    for (auto const& [lam, v] :
         {std::pair{e.lambda_small, e.v_small}, std::pair{e.lambda_big, e.v_big}}) {
      Vec2<double> r = m * v - Vec2<double>{lam * v.x, lam * v.y};
      CHECK(norm(r) <= 1e-12 * scale);
    }
    CHECK(e.lambda_small * e.lambda_big == doctest::Approx(det(m)).epsilon(1e-12));
    ++done;
  }
}

TEST_CASE("cyclic tridiagonal solve") {
  SUBCASE("identity") {
    CyclicTridiagonal<double> m{{1, 1, 1, 1, 1}, {0, 0, 0, 0, 0}};
    std::vector<double> b{3, -1, 2, 0.5, 7};
    auto x = solve_cyclic_tridiagonal(m, b);
    for (size_t i = 0; i < b.size(); ++i) CHECK(x[i] == doctest::Approx(b[i]).epsilon(1e-14));
  }

  SUBCASE("n=2 wrap doubling, nonsingular") {
    // Both off entries couple the same pair, so the dense system is
    // [[3,2],[2,3]].
    CyclicTridiagonal<double> m{{3, 3}, {1, 1}};
    std::vector<double> b{1.0, -2.0};
    auto x = solve_cyclic_tridiagonal(m, b);
    auto want = dense_solve(cyclic_dense(m), b);
    CHECK(x[0] == doctest::Approx(want[0]).epsilon(1e-13));
    CHECK(x[1] == doctest::Approx(want[1]).epsilon(1e-13));
  }

  SUBCASE("n=2 wrap doubling makes [[2,2],[2,2]]: singular") {
    CyclicTridiagonal<double> m{{2, 2}, {1, 1}};
    std::vector<double> b{1.0, 0.0};
    CHECK_THROWS_AS(solve_cyclic_tridiagonal(m, b), SingularSystem);
    CHECK_THROWS_AS(dense_solve(cyclic_dense(m), b), SingularSystem);
  }

  SUBCASE("random diagonally dominant systems match the dense oracle") {
    std::mt19937_64 rng(4242);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int it = 0; it < 300; ++it) {
      size_t n = 3 + size_t(rng() % 6);
      CyclicTridiagonal<double> m;
      m.diag.resize(n);
      m.off.resize(n);
      for (size_t i = 0; i < n; ++i) {
        m.off[i] = u(rng);
        m.diag[i] = 4.0 + u(rng);
      }
      std::vector<double> b(n);
      for (auto& v : b) v = u(rng);
      auto x = solve_cyclic_tridiagonal(m, b);
      auto want = dense_solve(cyclic_dense(m), b);
      for (size_t i = 0; i < n; ++i) CHECK(std::fabs(x[i] - want[i]) < 1e-10);
    }
  }

  SUBCASE("residual at working precision, n=7") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    CyclicTridiagonal<double> m;
    m.diag.assign(7, 0.0);
    m.off.assign(7, 0.0);
    for (size_t i = 0; i < 7; ++i) {
      m.diag[i] = 5.0 + u(rng);
      m.off[i] = u(rng);
    }
    std::vector<double> b(7);
    for (auto& v : b) v = u(rng);
    auto x = solve_cyclic_tridiagonal(m, b);
    auto a = cyclic_dense(m);
    for (size_t i = 0; i < 7; ++i) {
      double r = -b[i];
      for (size_t j = 0; j < 7; ++j) r += a[i][j] * x[j];
      CHECK(std::fabs(r) <= 1e3 * 2.2e-16 * 6.0);
    }
  }

  SUBCASE("extended scalar path") {
    CyclicTridiagonal<DDouble> m;
    m.diag = {DDouble(4.0), DDouble(5.0), DDouble(4.5), DDouble(6.0)};
    m.off = {DDouble(1.0), DDouble(-0.5), DDouble(0.75), DDouble(0.25)};
    std::vector<DDouble> b{DDouble(1.0), DDouble(2.0), DDouble(-1.0), DDouble(0.5)};
    auto x = solve_cyclic_tridiagonal(m, b);
    // Residual must sit at extended working precision.
    for (size_t i = 0; i < 4; ++i) {
      size_t prev = (i + 3) % 4, next = (i + 1) % 4;
      DDouble r = m.diag[i] * x[i] + m.off[i] * x[next] + m.off[prev] * x[prev] - b[i];
      CHECK(std::fabs(to_double(r)) < 1e-28);
    }
  }
}

TEST_CASE("symmetric tridiagonal solve matches dense oracle") {
  std::mt19937_64 rng(55);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int it = 0; it < 200; ++it) {
    size_t n = 2 + size_t(rng() % 7);
    SymTridiagonal<double> m;
    m.diag.resize(n);
    m.off.resize(n - 1);
    for (size_t i = 0; i < n; ++i) m.diag[i] = 4.0 + u(rng);
    for (size_t i = 0; i + 1 < n; ++i) m.off[i] = u(rng);
    std::vector<double> b(n);
    for (auto& v : b) v = u(rng);

    std::vector<std::vector<double>> a(n, std::vector<double>(n, 0.0));
    for (size_t i = 0; i < n; ++i) a[i][i] = m.diag[i];
    for (size_t i = 0; i + 1 < n; ++i) a[i][i + 1] = a[i + 1][i] = m.off[i];

    auto x = solve_sym_tridiagonal(m, b);
    auto want = dense_solve(a, b);
    for (size_t i = 0; i < n; ++i) CHECK(std::fabs(x[i] - want[i]) < 1e-11);
  }
}

TEST_CASE("linear_fit") {
  SUBCASE("exact line") {
    std::vector<double> xs{0, 1, 2, 3, 4}, ys;
    for (double x : xs) ys.push_back(-0.75 * x + 2.5);
    auto f = linear_fit(xs, ys);
    CHECK(f.slope == doctest::Approx(-0.75).epsilon(1e-13));
    CHECK(f.intercept == doctest::Approx(2.5).epsilon(1e-13));
    CHECK(f.max_abs_residual < 1e-12);
  }
  SUBCASE("perturbed line reports residual") {
    std::vector<double> xs, ys;
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> u(-1e-3, 1e-3);
    double worst = 0.0;
    for (int i = 0; i < 20; ++i) {
      double noise = u(rng);
      xs.push_back(i);
      ys.push_back(2.0 * i + 1.0 + noise);
      worst = std::max(worst, std::fabs(noise));
    }
    auto f = linear_fit(xs, ys);
    CHECK(f.slope == doctest::Approx(2.0).epsilon(1e-3));
    CHECK(f.max_abs_residual >= 1e-4 * 0.1);
    CHECK(f.max_abs_residual <= 2.5e-3);
  }
  SUBCASE("degenerate abscissae") {
    std::vector<double> xs{1.0, 1.0, 1.0}, ys{1.0, 2.0, 3.0};
    CHECK_THROWS_AS(linear_fit(xs, ys), DegenerateAbscissae);
  }
}
