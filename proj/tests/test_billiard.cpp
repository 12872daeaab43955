#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <random>
#include <vector>

#include "doctest.h"
#include "mlspec/billiard.hpp"
#include "mlspec/boundary.hpp"
#include "mlspec/domain.hpp"
#include "mlspec/errors.hpp"

using namespace mlspec;

namespace {

constexpr double kPi = 3.141592653589793;
constexpr double kTwoPi = 6.283185307179586;

// Composite Simpson over one period; the integrand is smooth, so n = 2^14
// leaves errors far below the tolerances it backs.
template <class F>
double simpson_period(F&& f, int n = 1 << 14) {
  double h = kTwoPi / n;
  double acc = 0.0;
  for (int i = 0; i < n; i += 2)
    acc += f(i * h) + 4.0 * f((i + 1) * h) + f((i + 2) * h);
  return acc * h / 3.0;
}

double det2(Mat2<double> const& m) { return m.a * m.d - m.b * m.c; }

}  // namespace

TEST_CASE("round boundary: closed-form bounce and parabolic two-bounce block") {
  for (double radius : {1.0, 2.5}) {
    Boundary<double> b{DomainSpec::circle(radius)};
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> uth(0.0, kTwoPi);
    std::uniform_real_distribution<double> uph(0.05, kPi - 0.05);
    for (int i = 0; i < 40; ++i) {
      double th = uth(rng), ph = uph(rng);
      StepResult<double> st = step(b, th, ph);
      CHECK(std::fabs(st.theta_next - (th + 2.0 * ph)) < 1e-13);
      CHECK(std::fabs(st.phi_next - ph) < 1e-13);
      CHECK(std::fabs(st.data.length - 2.0 * radius * std::sin(ph)) < 1e-13 * radius);
      CHECK(std::fabs(st.data.cos_out - std::cos(ph)) < 1e-14);
      CHECK(std::fabs(st.data.sin_out - std::sin(ph)) < 1e-14);
    }
  }

  Boundary<double> unit{DomainSpec::circle(1.0)};
  Mat2<double> j = jacobian(unit, 0.0, kPi);
  CHECK(std::fabs(j.a - 1.0) < 1e-13);
  CHECK(std::fabs(j.b - 2.0) < 1e-13);
  CHECK(std::fabs(j.c) < 1e-13);
  CHECK(std::fabs(j.d - 1.0) < 1e-13);
  Mat2<double> full = jacobian(unit, kPi, kTwoPi) * j;
  CHECK(std::fabs(full.a + full.d - 2.0) < 1e-12);  // every round orbit is parabolic

  Boundary<DDouble> bd{DomainSpec::circle(1.0)};
  for (double ph : {0.3, 1.2, 2.9}) {
    StepResult<DDouble> st = step(bd, DDouble(0.7), DDouble(ph));
    CHECK(to_double(abs(st.theta_next - (DDouble(0.7) + mul_pwr2(DDouble(ph), 2.0)))) <
          1e-27);
    CHECK(to_double(abs(st.phi_next - DDouble(ph))) < 1e-27);
  }
}

TEST_CASE("chord length partials match difference quotients") {
  for (auto spec : {DomainSpec::ellipse(1.0, 0.6), DomainSpec::generic()}) {
    Boundary<double> b{spec};
    auto len = [&](double f, double t) { return chord(b, f, t).length; };
    std::mt19937_64 rng(23);
    std::uniform_real_distribution<double> uth(0.0, kTwoPi);
    std::uniform_real_distribution<double> ugap(0.5, 5.7);
    for (int i = 0; i < 25; ++i) {
      double tf = uth(rng);
      double tt = tf + ugap(rng);
      ChordData<double> cd = chord(b, tf, tt);

      CHECK(cd.sin_out > 0.0);
      CHECK(cd.sin_in > 0.0);
      CHECK(std::fabs(cd.cos_out * cd.cos_out + cd.sin_out * cd.sin_out - 1.0) < 1e-14);
      CHECK(cd.d12 > 0.0);

      double gf = b.speed(tf), gt = b.speed(tt);
      double gpf = b.speed_derivative(tf), gpt = b.speed_derivative(tt);

      double h1 = 1e-6;
      double fd1 = (len(tf + h1, tt) - len(tf - h1, tt)) / (2.0 * h1);
      double fd2 = (len(tf, tt + h1) - len(tf, tt - h1)) / (2.0 * h1);
      CHECK(std::fabs(fd1 - cd.d1 * gf) < 1e-8 * (1.0 + std::fabs(fd1)));
      CHECK(std::fabs(fd2 - cd.d2 * gt) < 1e-8 * (1.0 + std::fabs(fd2)));

      double h2 = 1e-4;
      double l0 = cd.length;
      double fd11 = (len(tf + h2, tt) - 2.0 * l0 + len(tf - h2, tt)) / (h2 * h2);
      double fd22 = (len(tf, tt + h2) - 2.0 * l0 + len(tf, tt - h2)) / (h2 * h2);
      double fd12 = (len(tf + h2, tt + h2) - len(tf + h2, tt - h2) -
                     len(tf - h2, tt + h2) + len(tf - h2, tt - h2)) /
                    (4.0 * h2 * h2);
      double ex11 = cd.d11 * gf * gf + cd.d1 * gpf;
      double ex22 = cd.d22 * gt * gt + cd.d2 * gpt;
      double ex12 = cd.d12 * gf * gt;
      CHECK(std::fabs(fd11 - ex11) < 3e-6 * (1.0 + std::fabs(ex11)));
      CHECK(std::fabs(fd22 - ex22) < 3e-6 * (1.0 + std::fabs(ex22)));
      CHECK(std::fabs(fd12 - ex12) < 3e-6 * (1.0 + std::fabs(ex12)));
    }
  }
}

TEST_CASE("bounce derivative matches a difference quotient of the map") {
  for (auto spec : {DomainSpec::ellipse(1.0, 0.6), DomainSpec::generic()}) {
    Boundary<double> b{spec};
    double const pairs[][2] = {{0.4, 2.1}, {1.0, 4.5}, {3.3, 5.9}, {5.5, 8.2}};
    for (auto const& pr : pairs) {
      Mat2<double> j = jacobian(b, pr[0], pr[1]);
      Mat2<double> fd = jacobian_fd(b, pr[0], pr[1], 1e-6);
      CHECK(std::fabs(det2(j) - 1.0) < 1e-12);
      CHECK(j.b > 0.0);  // positive twist
      CHECK(std::fabs(j.a - fd.a) < 2e-5 * (1.0 + std::fabs(j.a)));
      CHECK(std::fabs(j.b - fd.b) < 2e-5 * (1.0 + std::fabs(j.b)));
      CHECK(std::fabs(j.c - fd.c) < 2e-5 * (1.0 + std::fabs(j.c)));
      CHECK(std::fabs(j.d - fd.d) < 2e-5 * (1.0 + std::fabs(j.d)));
    }

    Boundary<DDouble> bd{spec};
    Mat2<DDouble> jd = jacobian(bd, DDouble(0.4), DDouble(2.1));
    DDouble det = jd.a * jd.d - jd.b * jd.c;
    CHECK(to_double(abs(det - DDouble(1.0))) < 1e-28);
  }
}

TEST_CASE("bounce respects the requested departure angle and inverts cleanly") {
  Boundary<double> b{DomainSpec::generic()};
  std::mt19937_64 rng(37);
  std::uniform_real_distribution<double> uth(0.0, kTwoPi);
  std::uniform_real_distribution<double> uph(0.02, kPi - 0.02);
  for (int i = 0; i < 60; ++i) {
    double th = uth(rng), ph = uph(rng);
    StepResult<double> st = step(b, th, ph);
    CHECK(st.theta_next > th);
    CHECK(st.theta_next < th + kTwoPi);
    CHECK(st.phi_next > 0.0);
    CHECK(st.phi_next < kPi);
    // The found chord must leave at exactly the requested inclination.
    CHECK(std::fabs(st.data.cos_out - std::cos(ph)) < 1e-13);
    CHECK(std::fabs(st.data.sin_out - std::sin(ph)) < 1e-13);

    StepResult<double> back = unstep(b, st.theta_next, st.phi_next);
    CHECK(std::fabs(back.theta_next - th) < 1e-11);
    CHECK(std::fabs(back.phi_next - ph) < 1e-11);
    CHECK(back.theta_next < st.theta_next);
    CHECK(back.theta_next > st.theta_next - kTwoPi);
  }

  // Extended and plain precision agree on a shared sample.
  Boundary<DDouble> bd{DomainSpec::generic()};
  for (int i = 0; i < 8; ++i) {
    double th = uth(rng), ph = uph(rng);
    StepResult<double> st = step(b, th, ph);
    StepResult<DDouble> sd = step(bd, DDouble(th), DDouble(ph));
    CHECK(std::fabs(to_double(sd.theta_next) - st.theta_next) < 1e-12);
    CHECK(std::fabs(to_double(sd.phi_next) - st.phi_next) < 1e-12);
    StepResult<DDouble> backd = unstep(bd, sd.theta_next, sd.phi_next);
    CHECK(to_double(abs(backd.theta_next - DDouble(th))) < 1e-26);
    CHECK(to_double(abs(backd.phi_next - DDouble(ph))) < 1e-26);
  }

  // The lift is respected: translating the start by whole turns translates
  // the landing by the same amount.
  StepResult<double> base = step(b, 1.234, 0.8);
  StepResult<double> lifted = step(b, 1.234 + 16.0 * kTwoPi, 0.8);
  CHECK(std::fabs(lifted.theta_next - base.theta_next - 16.0 * kTwoPi) < 1e-11);

  // Steeper departures land further along (monotone twist).
  double prev = -1.0;
  for (double ph = 0.3; ph < 2.9; ph += 0.2) {
    double landed = step(b, 1.234, ph).theta_next;
    CHECK(landed > prev);
    prev = landed;
  }

  // Near-tangent launches in both directions stay inside the angular window.
  StepResult<double> graze_fwd = step(b, 0.9, 0.01);
  CHECK(graze_fwd.theta_next - 0.9 < 0.5);
  StepResult<double> graze_bwd = step(b, 0.9, kPi - 0.01);
  CHECK(graze_bwd.theta_next - 0.9 > kTwoPi - 0.5);
}

TEST_CASE("degenerate configurations are rejected") {
  Boundary<double> b{DomainSpec::ellipse(1.0, 0.6)};
  CHECK_THROWS_AS((void)chord(b, 1.0, 1.0), DegenerateChord);
  CHECK_THROWS_AS((void)chord(b, 1.0, 1.0 + 1e-15), DegenerateChord);
  CHECK_THROWS_AS((void)chord(b, 1.0, 1.0 + kTwoPi), DegenerateChord);
  CHECK_THROWS_AS((void)step(b, 0.5, 0.0), GrazingOrbit);
  CHECK_THROWS_AS((void)step(b, 0.5, kPi), GrazingOrbit);
  CHECK_THROWS_AS((void)step(b, 0.5, -0.4), GrazingOrbit);
  CHECK_THROWS_AS((void)step(b, 0.5, 4.0), GrazingOrbit);

  // A chord short enough to collapse the mixed partial but long enough to
  // evade the coincidence floor trips the twist guard.
  Boundary<double> unit{DomainSpec::circle(1.0)};
  CHECK_THROWS_AS((void)jacobian(unit, 0.0, 1e-13), TwistDegenerate);
}

TEST_CASE("adapted coordinates: round fixtures and the cubic deviation law") {
  Boundary<double> unit{DomainSpec::circle(1.0)};
  for (double th : {0.0, 0.9, 3.1, 5.6}) {
    AdaptedPoint<double> p = adapted_point(unit, th, 1.1);
    CHECK(std::fabs(p.x - th / kTwoPi) < 1e-15);
    CHECK(std::fabs(p.y - (2.0 / kPi) * std::sin(0.55)) < 1e-15);
  }

  // One bounce advances x by phi/pi on the round table.
  for (double ph : {0.4, 1.3}) {
    StepResult<double> st = step(unit, 0.7, ph);
    AdaptedPoint<double> p0 = adapted_point(unit, 0.7, ph);
    AdaptedPoint<double> p1 = adapted_point(unit, st.theta_next, st.phi_next);
    CHECK(std::fabs((p1.x - p0.x) - ph / kPi) < 1e-14);
  }

  // Near tangency the advance deviates from y at cubic order with the
  // round-table coefficient pi^2 / 24.
  {
    double ph = 1e-3;
    StepResult<double> st = step(unit, 0.7, ph);
    AdaptedPoint<double> p0 = adapted_point(unit, 0.7, ph);
    AdaptedPoint<double> p1 = adapted_point(unit, st.theta_next, st.phi_next);
    double ratio = (p1.x - p0.x - p0.y) / (p0.y * p0.y * p0.y);
    CHECK(std::fabs(ratio - kPi * kPi / 24.0) < 0.01 * kPi * kPi / 24.0);
  }
  {
    Boundary<DDouble> unitd{DomainSpec::circle(1.0)};
    DDouble ph = DDouble(1e-6);
    StepResult<DDouble> st = step(unitd, DDouble(0.7), ph);
    AdaptedPoint<DDouble> p0 = adapted_point(unitd, DDouble(0.7), ph);
    AdaptedPoint<DDouble> p1 = adapted_point(unitd, st.theta_next, st.phi_next);
    DDouble ratio = (p1.x - p0.x - p0.y) / (p0.y * p0.y * p0.y);
    DDouble target = dd_pi * dd_pi / DDouble(24.0);
    CHECK(to_double(abs(ratio - target)) < 1e-4 * to_double(target));
  }

  // Non-round scaling against quadrature: x and y rebuilt from first
  // principles with Simpson weights.
  Boundary<double> e{DomainSpec::ellipse(1.0, 0.6)};
  double c_total = simpson_period(
      [&](double t) { return std::cbrt(std::pow(e.curvature(t), 2.0)) * e.speed(t); });
  for (double th : {0.3, 2.0, 4.4}) {
    double ph = 0.7;
    AdaptedPoint<double> p = adapted_point(e, th, ph);
    CHECK(std::fabs(p.x - e.adapted_of_angle(th) / c_total) < 1e-12);
    double y_direct = 4.0 * std::sin(ph / 2.0) / (c_total * std::cbrt(e.curvature(th)));
    CHECK(std::fabs(p.y - y_direct) < 1e-12);
  }
}
