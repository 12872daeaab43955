#pragma once

#include <vector>

#include "mlspec/billiard.hpp"

namespace mlspec {

/// Closed billiard polygon of rotation number p/q: q lifted vertex angles,
/// strictly increasing, first one reduced to [0, 2 pi), closing up after one
/// index period with a shift of 2 pi p.
template <class S>
struct PeriodicOrbit {
  int p = 0, q = 0;
  std::vector<S> angles;
  S length{};             // perimeter of the closed polygon
  double residual = 0.0;  // sup norm of the stationarity gradient at acceptance

  /// Periodic lift: angle(i + q) = angle(i) + 2 pi p for any integer i.
  S angle(long i) const {
    long k = i / q, r = i % q;
    if (r < 0) {
      r += q;
      --k;
    }
    return angles[static_cast<size_t>(r)] +
           two_pi_const<S>() * S(double(p) * double(k));
  }
};

struct SolveOptions {
  int newton_rounds = 140;
  int starts = 8;
  double jitter = 0.35;  // seed spread, relative to the mean angular gap
  unsigned long long seed = 0x9e3779b97f4a7c15ULL;
};

/// Damped Newton from an explicit ordered seed of q lifted angles.
/// Throws NoConvergence when the iteration stalls.
template <class S>
PeriodicOrbit<S> refine_periodic(Boundary<S> const& b, int p, int q,
                                 std::vector<S> const& seed_angles,
                                 SolveOptions const& opts = {});

/// All distinct critical closed polygons found from jittered multistart,
/// longest first.  Generically the front entry is the unique maximizer.
template <class S>
std::vector<PeriodicOrbit<S>> periodic_candidates(Boundary<S> const& b, int p, int q,
                                                  SolveOptions const& opts = {});

/// The longest critical closed polygon of rotation number p/q (the marked
/// length spectrum representative).  Falls back to continuation from a
/// near-round blend of the domain if every direct start fails.
template <class S>
PeriodicOrbit<S> solve_periodic(Boundary<S> const& b, int p, int q,
                                SolveOptions const& opts = {});

/// Critical cycle of rotation (n p, n q - 1), grown from the n-fold cover of
/// ref with its last vertex removed.  First rung of the sweep ladder.
template <class S>
PeriodicOrbit<S> punctured_cover_orbit(Boundary<S> const& b, PeriodicOrbit<S> const& ref, int n,
                                       SolveOptions const& opts = {});

/// Critical cycle of the mediant class (prev.p + ref.p, prev.q + ref.q),
/// seeded by inserting one ref period into prev where prev shadows ref most
/// closely.  Tracks one orbit family along the sweep without multistart.
template <class S>
PeriodicOrbit<S> splice_continuation(Boundary<S> const& b, PeriodicOrbit<S> const& prev,
                                     PeriodicOrbit<S> const& ref, SolveOptions const& opts = {});

/// Derivative of the q-fold return map at the orbit's first vertex,
/// in canonical (arclength, -cos angle) coordinates.
template <class S>
Mat2<S> monodromy(Boundary<S> const& b, PeriodicOrbit<S> const& orbit);

template <class S>
struct OrbitEigenData {
  S trace{};
  S residue{};  // (2 - trace) / 4
  bool hyperbolic = false;
  S lambda{};          // eigenvalue of smaller magnitude; in (0, 1) when trace > 2
  Vec2<S> stable{};    // its unit eigenvector
  Vec2<S> unstable{};  // unit eigenvector of 1/lambda
};

template <class S>
OrbitEigenData<S> eigendata(Mat2<S> const& mono);

/// Hessian, in the q+1 window vertex arclengths (ends free), of the negated
/// total chord length over one period window: (q+1) x (q+1) symmetric
/// tridiagonal, positive definite at a hyperbolic length maximizer.
template <class S>
SymTridiagonal<S> w_matrix(Boundary<S> const& b, PeriodicOrbit<S> const& orbit);

/// Quadratic tail coefficients of the length defect: the eigendirections of
/// the return map pushed along one period, contracted against the second
/// variation.  c_plus pairs with the stable direction, c_minus with the
/// unstable one; both are base-point dependent.
template <class S>
struct TailCoefficients {
  std::vector<S> z_plus, z_minus;  // q+1 arclength components each
  S c_plus{}, c_minus{};
};

template <class S>
TailCoefficients<S> tail_coefficients(Boundary<S> const& b, PeriodicOrbit<S> const& orbit);

/// Critical chain pinned to the periodic orbit at index -K q + 1 and to its
/// one-slot-ahead copy at index M q: the discrete connecting orbit truncated
/// to a window of (K+M) q - 1 chords spanning K+M periods of rotation.
/// barrier holds (K+M) L minus the chain's total length, converging to the
/// least barrier value as the window grows.
template <class S>
struct HeteroclinicWindow {
  int k_periods = 0, m_periods = 0;
  long first_index = 0;  // orbit index of angles.front(); both ends pinned
  std::vector<S> angles;
  S barrier{};
  double tail_decay = 0.0;  // measured per-period contraction in the tails
  double residual = 0.0;
};

template <class S>
HeteroclinicWindow<S> solve_heteroclinic(Boundary<S> const& b,
                                         PeriodicOrbit<S> const& orbit,
                                         int k_periods, int m_periods);

extern template struct PeriodicOrbit<double>;
extern template struct PeriodicOrbit<DDouble>;
extern template PeriodicOrbit<double> refine_periodic(Boundary<double> const&, int, int,
                                                      std::vector<double> const&,
                                                      SolveOptions const&);
extern template PeriodicOrbit<DDouble> refine_periodic(Boundary<DDouble> const&, int, int,
                                                       std::vector<DDouble> const&,
                                                       SolveOptions const&);
extern template std::vector<PeriodicOrbit<double>> periodic_candidates(
    Boundary<double> const&, int, int, SolveOptions const&);
extern template std::vector<PeriodicOrbit<DDouble>> periodic_candidates(
    Boundary<DDouble> const&, int, int, SolveOptions const&);
extern template PeriodicOrbit<double> punctured_cover_orbit(Boundary<double> const&,
                                                            PeriodicOrbit<double> const&, int,
                                                            SolveOptions const&);
extern template PeriodicOrbit<DDouble> punctured_cover_orbit(Boundary<DDouble> const&,
                                                             PeriodicOrbit<DDouble> const&, int,
                                                             SolveOptions const&);
extern template PeriodicOrbit<double> splice_continuation(Boundary<double> const&,
                                                          PeriodicOrbit<double> const&,
                                                          PeriodicOrbit<double> const&,
                                                          SolveOptions const&);
extern template PeriodicOrbit<DDouble> splice_continuation(Boundary<DDouble> const&,
                                                           PeriodicOrbit<DDouble> const&,
                                                           PeriodicOrbit<DDouble> const&,
                                                           SolveOptions const&);
extern template PeriodicOrbit<double> solve_periodic(Boundary<double> const&, int, int,
                                                     SolveOptions const&);
extern template PeriodicOrbit<DDouble> solve_periodic(Boundary<DDouble> const&, int, int,
                                                      SolveOptions const&);
extern template Mat2<double> monodromy(Boundary<double> const&, PeriodicOrbit<double> const&);
extern template Mat2<DDouble> monodromy(Boundary<DDouble> const&,
                                        PeriodicOrbit<DDouble> const&);
extern template OrbitEigenData<double> eigendata(Mat2<double> const&);
extern template OrbitEigenData<DDouble> eigendata(Mat2<DDouble> const&);
extern template SymTridiagonal<double> w_matrix(Boundary<double> const&,
                                                PeriodicOrbit<double> const&);
extern template SymTridiagonal<DDouble> w_matrix(Boundary<DDouble> const&,
                                                 PeriodicOrbit<DDouble> const&);
extern template TailCoefficients<double> tail_coefficients(Boundary<double> const&,
                                                           PeriodicOrbit<double> const&);
extern template TailCoefficients<DDouble> tail_coefficients(Boundary<DDouble> const&,
                                                            PeriodicOrbit<DDouble> const&);
extern template HeteroclinicWindow<double> solve_heteroclinic(Boundary<double> const&,
                                                              PeriodicOrbit<double> const&,
                                                              int, int);
extern template HeteroclinicWindow<DDouble> solve_heteroclinic(Boundary<DDouble> const&,
                                                               PeriodicOrbit<DDouble> const&,
                                                               int, int);

}  // namespace mlspec
