#include <mlspec/spectra.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include <mlspec/errors.hpp>
#include <mlspec/extrapolate.hpp>

namespace mlspec {

std::vector<std::pair<int, int>> farey_fractions(int q_max) {
  if (q_max < 2) throw ConfigError("farey_fractions: need q_max >= 2");
  std::vector<std::pair<int, int>> grid;
  for (int q = 2; q <= q_max; ++q)
    for (int p = 1; p < q; ++p)
      if (std::gcd(p, q) == 1) grid.emplace_back(p, q);
  std::sort(grid.begin(), grid.end(), [](auto const& a, auto const& b) {
    // Exact comparison of p/q < r/s as p*s < r*q; distinct reduced fractions
    // never tie.
    return static_cast<long>(a.first) * b.second < static_cast<long>(b.first) * a.second;
  });
  return grid;
}

template <class S>
SpectrumEntry<S> spectrum_point(Boundary<S> const& b, int p, int q, SolveOptions const& opts) {
  PeriodicOrbit<S> orbit = solve_periodic(b, p, q, opts);
  OrbitEigenData<S> ed = eigendata(monodromy(b, orbit));
  SpectrumEntry<S> e;
  e.p = p;
  e.q = q;
  e.ml_max = orbit.length;
  e.beta = -(orbit.length / S(double(q)));
  e.trace = ed.trace;
  e.residue = ed.residue;
  e.hyperbolic = ed.hyperbolic;
  e.lambda = ed.hyperbolic ? ed.lambda : S(1.0);
  return e;
}

template <class S>
SpectrumTable<S> spectrum_table(Boundary<S> const& b, int q_max, SolveOptions const& opts) {
  SpectrumTable<S> table;
  for (auto const& [p, q] : farey_fractions(q_max))
    table.entries.push_back(spectrum_point(b, p, q, opts));
  return table;
}

template <class S>
S ml_max(Boundary<S> const& b, int p, int q, SolveOptions const& opts) {
  return solve_periodic(b, p, q, opts).length;
}

template <class S>
S beta(Boundary<S> const& b, int p, int q, SolveOptions const& opts) {
  return -(ml_max(b, p, q, opts) / S(double(q)));
}

template <class S>
std::vector<S> beta_right_quotients(Boundary<S> const& b, int p, int q, int n_max,
                                    SolveOptions const& opts) {
  if (n_max < 4) throw ConfigError("beta_right_quotients: need n_max >= 4");
  PeriodicOrbit<S> ref = solve_periodic(b, p, q, opts);
  std::vector<S> quotients;
  quotients.reserve(static_cast<size_t>(n_max - 1));
  PeriodicOrbit<S> rung;
  for (int n = 2; n <= n_max; ++n) {
    rung = (n == 2) ? punctured_cover_orbit(b, ref, 2, opts)
                    : splice_continuation(b, rung, ref, opts);
    // With a_N = L_N - N L, the quotient of the (Np, Nq-1) class collapses
    // to -(L + q a_N)/p exactly.
    S a_n = rung.length - S(double(n)) * ref.length;
    quotients.push_back(-(ref.length + S(double(q)) * a_n) / S(double(p)));
  }
  return quotients;
}

template <class S>
S beta_right_derivative(Boundary<S> const& b, int p, int q, int n_max, SolveOptions const& opts) {
  if (n_max < 4) throw ConfigError("beta_right_derivative: need n_max >= 4");
  std::vector<S> quotients = beta_right_quotients(b, p, q, n_max, opts);
  double scale = std::fabs(to_double(quotients.front())) + 1.0;

  // Convexity makes the quotients nonincreasing.  Rounding jitter at the
  // working-precision floor is tolerated and ends the usable prefix; a larger
  // upward jump means some rung missed its class maximum.
  size_t usable = quotients.size();
  for (size_t i = 1; i < quotients.size(); ++i) {
    int n = static_cast<int>(i) + 2;
    double jitter = 1e3 * ScalarTraits<S>::epsilon() * scale * double(n) * double(q) *
                    double(q) / double(p);
    double rise = to_double(quotients[i] - quotients[i - 1]);
    if (rise > jitter)
      throw MonotonicityViolated(
          "beta_right_derivative: difference quotients rise at rung " + std::to_string(n) +
          " by " + std::to_string(rise) + "; some class maximum was missed");
    if (rise > 0.0 && usable == quotients.size()) usable = i + 1;
  }

  // A hyperbolic table converges geometrically: once the tail of the ladder
  // sits flat at the rounding floor, the last quotient IS the limit, and a
  // polynomial extrapolation would only re-inflate the early rungs'
  // transient.
  int n_top = static_cast<int>(usable) + 1;
  {
    double tail_jitter = 1e3 * ScalarTraits<S>::epsilon() * scale * double(n_top) *
                         double(q) * double(q) / double(p);
    size_t flat = 1;
    while (flat < usable &&
           std::fabs(to_double(quotients[usable - 1] - quotients[usable - 1 - flat])) <=
               tail_jitter)
      ++flat;
    if (flat >= 3) return quotients[usable - 1];
  }

  // Parabolic tail (the O(1/N) regime): extrapolate to zero offset along the
  // exact abscissae d_N = p/(q(Nq-1)), over a geometrically thinned set of
  // rungs -- adjacent rungs cluster in d, and extrapolating to zero from
  // clustered nodes amplifies the solver's rounding noise by the
  // node-to-spacing ratio per elimination stage.
  std::vector<int> rungs;
  for (int n = n_top; n >= 2 && rungs.size() < 7; n /= 2) rungs.push_back(n);
  if (rungs.size() == 1 && n_top >= 3) rungs.push_back(2);
  std::vector<S> xs, ys;
  xs.reserve(rungs.size());
  ys.reserve(rungs.size());
  for (int n : rungs) {
    xs.push_back(S(double(p)) / (S(double(q)) * S(double(n) * double(q) - 1.0)));
    ys.push_back(quotients[static_cast<size_t>(n - 2)]);
  }
  if (xs.size() < 2) return ys.back();
  return neville_zero(xs, ys).value;
}

template <class S>
S barrier_from_beta(Boundary<S> const& b, int p, int q, int n_max, SolveOptions const& opts) {
  S slope = beta_right_derivative(b, p, q, n_max, opts);
  S omega = S(double(p)) / S(double(q));
  return omega * slope - beta(b, p, q, opts);
}

template <class S>
S alpha(SpectrumTable<S> const& table, S c) {
  if (table.entries.empty()) throw ConfigError("alpha: empty spectrum table");
  bool have = false;
  S best{};
  for (auto const& e : table.entries) {
    S w = S(double(e.p)) / S(double(e.q));
    S val = w * c - e.beta;
    if (!have || to_double(val) > to_double(best)) {
      best = val;
      have = true;
    }
  }
  return best;
}

template <class S>
S alpha(Boundary<S> const& b, S c, std::vector<std::pair<int, int>> const& grid,
        SolveOptions const& opts) {
  if (grid.empty()) throw ConfigError("alpha: empty rotation grid");
  SpectrumTable<S> table;
  for (auto const& [p, q] : grid) {
    SpectrumEntry<S> e;
    e.p = p;
    e.q = q;
    e.beta = beta(b, p, q, opts);
    table.entries.push_back(e);
  }
  return alpha(table, c);
}

template <class S>
CausticRecord<S> circle_caustic(S radius, S omega) {
  using std::atan2;
  using std::cos;
  using std::sqrt;
  double w = to_double(omega);
  if (!(w > 0.0) || !(w <= 0.5))
    throw ConfigError("circle_caustic: rotation number must lie in (0, 1/2]");
  if (!(to_double(radius) > 0.0)) throw ConfigError("circle_caustic: radius must be positive");

  CausticRecord<S> rec;
  rec.omega = omega;
  rec.caustic_radius = radius * cos(pi_const<S>() * omega);
  rec.caustic_length = two_pi_const<S>() * rec.caustic_radius;

  // Tangent construction: from a point of the table, the chord to the next
  // bounce touches the caustic once; the invariant is the two tangent
  // segments minus the caustic arc between the tangency points.
  S rho = rec.caustic_radius;
  S tangent = sqrt(radius * radius - rho * rho);
  S half_angle = atan2(tangent, rho);
  S arc = rho * mul_pwr2(half_angle, 2.0);
  rec.invariant = mul_pwr2(tangent, 2.0) - arc;
  return rec;
}

template struct SpectrumEntry<double>;
template struct SpectrumEntry<DDouble>;
template struct SpectrumTable<double>;
template struct SpectrumTable<DDouble>;
template SpectrumEntry<double> spectrum_point(Boundary<double> const&, int, int,
                                              SolveOptions const&);
template SpectrumEntry<DDouble> spectrum_point(Boundary<DDouble> const&, int, int,
                                               SolveOptions const&);
template SpectrumTable<double> spectrum_table(Boundary<double> const&, int, SolveOptions const&);
template SpectrumTable<DDouble> spectrum_table(Boundary<DDouble> const&, int,
                                               SolveOptions const&);
template double ml_max(Boundary<double> const&, int, int, SolveOptions const&);
template DDouble ml_max(Boundary<DDouble> const&, int, int, SolveOptions const&);
template double beta(Boundary<double> const&, int, int, SolveOptions const&);
template DDouble beta(Boundary<DDouble> const&, int, int, SolveOptions const&);
template std::vector<double> beta_right_quotients(Boundary<double> const&, int, int, int,
                                                  SolveOptions const&);
template std::vector<DDouble> beta_right_quotients(Boundary<DDouble> const&, int, int, int,
                                                   SolveOptions const&);
template double beta_right_derivative(Boundary<double> const&, int, int, int,
                                      SolveOptions const&);
template DDouble beta_right_derivative(Boundary<DDouble> const&, int, int, int,
                                       SolveOptions const&);
template double barrier_from_beta(Boundary<double> const&, int, int, int, SolveOptions const&);
template DDouble barrier_from_beta(Boundary<DDouble> const&, int, int, int,
                                   SolveOptions const&);
template double alpha(SpectrumTable<double> const&, double);
template DDouble alpha(SpectrumTable<DDouble> const&, DDouble);
template double alpha(Boundary<double> const&, double, std::vector<std::pair<int, int>> const&,
                      SolveOptions const&);
template DDouble alpha(Boundary<DDouble> const&, DDouble,
                       std::vector<std::pair<int, int>> const&, SolveOptions const&);
template struct CausticRecord<double>;
template struct CausticRecord<DDouble>;
template CausticRecord<double> circle_caustic(double, double);
template CausticRecord<DDouble> circle_caustic(DDouble, DDouble);

}  // namespace mlspec
