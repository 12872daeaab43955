#pragma once

#include <utility>
#include <vector>

#include <mlspec/orbits.hpp>

namespace mlspec {

/// One row of the marked length spectrum at rotation number p/q.
template <class S>
struct SpectrumEntry {
  int p = 0;
  int q = 0;
  S ml_max{};    ///< marked length: the class-maximal perimeter
  S beta{};      ///< minimal average action, stored exactly as -ml_max/q
  S trace{};     ///< monodromy trace of the maximizing cycle
  S residue{};   ///< Greene residue (2 - trace)/4
  bool hyperbolic = false;
  S lambda{};    ///< contracting Floquet multiplier when hyperbolic, else 1
};

/// Marked length spectrum over a grid of rotation numbers.
template <class S>
struct SpectrumTable {
  std::vector<SpectrumEntry<S>> entries;  ///< sorted by rotation number

  SpectrumEntry<S> const* find(int p, int q) const {
    for (auto const& e : entries)
      if (e.p == p && e.q == q) return &e;
    return nullptr;
  }
};

/// All reduced fractions p/q in (0, 1) with q <= q_max, sorted by value.
std::vector<std::pair<int, int>> farey_fractions(int q_max);

/// Solve the p/q class and package its spectral data.
template <class S>
SpectrumEntry<S> spectrum_point(Boundary<S> const& b, int p, int q,
                                SolveOptions const& opts = {});

/// Spectrum rows for every reduced fraction with denominator at most q_max.
template <class S>
SpectrumTable<S> spectrum_table(Boundary<S> const& b, int q_max, SolveOptions const& opts = {});

/// Marked length of the p/q class: the maximal perimeter over its cycles.
template <class S>
S ml_max(Boundary<S> const& b, int p, int q, SolveOptions const& opts = {});

/// Mather's minimal average action at rotation p/q: -ml_max/q.
template <class S>
S beta(Boundary<S> const& b, int p, int q, SolveOptions const& opts = {});

/// Right difference quotients of beta at p/q along the (Np, Nq-1) ladder,
/// N = 2..n_max.  Convexity of beta makes them nonincreasing in N, settling
/// on the one-sided derivative from above.
template <class S>
std::vector<S> beta_right_quotients(Boundary<S> const& b, int p, int q, int n_max,
                                    SolveOptions const& opts = {});

/// One-sided derivative of beta at p/q from the right, extrapolated from the
/// quotient ladder.  Monotonicity violations beyond the rounding floor signal
/// a rung that missed its class maximum.
template <class S>
S beta_right_derivative(Boundary<S> const& b, int p, int q, int n_max,
                        SolveOptions const& opts = {});

/// Peierls barrier of the p/q class through the action identity
/// B = (p/q) beta'_+(p/q) - beta(p/q).
template <class S>
S barrier_from_beta(Boundary<S> const& b, int p, int q, int n_max,
                    SolveOptions const& opts = {});

/// Mather's alpha function (convex conjugate of beta) bounded from below over
/// the rational grid carried by the table: max over entries of w*c - beta(w).
template <class S>
S alpha(SpectrumTable<S> const& table, S c);

/// Same lower bound, solving each grid fraction on the spot.
template <class S>
S alpha(Boundary<S> const& b, S c, std::vector<std::pair<int, int>> const& grid,
        SolveOptions const& opts = {});

/// Caustic data for the circular table of radius R at rotation omega.
template <class S>
struct CausticRecord {
  S omega{};
  S caustic_radius{};  ///< R cos(pi omega)
  S caustic_length{};  ///< 2 pi R cos(pi omega), equal to -beta'(omega)
  S invariant{};       ///< Lazutkin invariant of the caustic
};

/// Closed-form circle caustic at rotation omega in (0, 1/2], by the explicit
/// tangent-segment construction: two tangent lengths from a boundary point
/// minus the caustic arc between the tangency points.
template <class S>
CausticRecord<S> circle_caustic(S radius, S omega);

extern template struct SpectrumEntry<double>;
extern template struct SpectrumEntry<DDouble>;
extern template struct SpectrumTable<double>;
extern template struct SpectrumTable<DDouble>;
extern template SpectrumEntry<double> spectrum_point(Boundary<double> const&, int, int,
                                                     SolveOptions const&);
extern template SpectrumEntry<DDouble> spectrum_point(Boundary<DDouble> const&, int, int,
                                                      SolveOptions const&);
extern template SpectrumTable<double> spectrum_table(Boundary<double> const&, int,
                                                     SolveOptions const&);
extern template SpectrumTable<DDouble> spectrum_table(Boundary<DDouble> const&, int,
                                                      SolveOptions const&);
extern template double ml_max(Boundary<double> const&, int, int, SolveOptions const&);
extern template DDouble ml_max(Boundary<DDouble> const&, int, int, SolveOptions const&);
extern template double beta(Boundary<double> const&, int, int, SolveOptions const&);
extern template DDouble beta(Boundary<DDouble> const&, int, int, SolveOptions const&);
extern template std::vector<double> beta_right_quotients(Boundary<double> const&, int, int, int,
                                                         SolveOptions const&);
extern template std::vector<DDouble> beta_right_quotients(Boundary<DDouble> const&, int, int,
                                                          int, SolveOptions const&);
extern template double beta_right_derivative(Boundary<double> const&, int, int, int,
                                             SolveOptions const&);
extern template DDouble beta_right_derivative(Boundary<DDouble> const&, int, int, int,
                                              SolveOptions const&);
extern template double barrier_from_beta(Boundary<double> const&, int, int, int,
                                         SolveOptions const&);
extern template DDouble barrier_from_beta(Boundary<DDouble> const&, int, int, int,
                                          SolveOptions const&);
extern template double alpha(SpectrumTable<double> const&, double);
extern template DDouble alpha(SpectrumTable<DDouble> const&, DDouble);
extern template double alpha(Boundary<double> const&, double,
                             std::vector<std::pair<int, int>> const&, SolveOptions const&);
extern template DDouble alpha(Boundary<DDouble> const&, DDouble,
                              std::vector<std::pair<int, int>> const&, SolveOptions const&);
extern template struct CausticRecord<double>;
extern template struct CausticRecord<DDouble>;
extern template CausticRecord<double> circle_caustic(double, double);
extern template CausticRecord<DDouble> circle_caustic(DDouble, DDouble);

}  // namespace mlspec
