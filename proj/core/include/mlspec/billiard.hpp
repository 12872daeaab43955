#pragma once

#include "mlspec/boundary.hpp"
#include "mlspec/linalg.hpp"

namespace mlspec {

/// Chord between two boundary points with the partial derivatives of its
/// length by arclength at each endpoint.  phi is the angle from the forward
/// tangent at departure to the chord; phi' the angle from the chord to the
/// forward tangent at arrival.  Both lie in (0, pi) for a chord traversed
/// counterclockwise.
template <class S>
struct ChordData {
  S length;
  S cos_out, sin_out;  // departure angle phi
  S cos_in, sin_in;    // arrival angle phi'
  S d1;                // dl/ds   at departure = -cos phi
  S d2;                // dl/ds'  at arrival   =  cos phi'
  S d11, d22, d12;     // second partials by arclength; d12 > 0 off the diagonal
};

/// Evaluates a chord; throws DegenerateChord when the endpoints coincide.
template <class S>
ChordData<S> chord(Boundary<S> const& b, S theta_from, S theta_to);

template <class S>
struct StepResult {
  S theta_next;
  S phi_next;
  ChordData<S> data;
};

/// One bounce: depart gamma(theta) at angle phi in (0, pi) from the forward
/// tangent, land at the unique other boundary intersection.  theta_next lies
/// strictly in (theta, theta + 2 pi).  Throws GrazingOrbit for phi outside
/// (0, pi), NoConvergence if root refinement stalls.
template <class S>
StepResult<S> step(Boundary<S> const& b, S theta, S phi);

/// Inverse bounce via time reversal: unstep(step(theta, phi)) returns to
/// (theta, phi).  theta_prev lies strictly in (theta - 2 pi, theta).
template <class S>
StepResult<S> unstep(Boundary<S> const& b, S theta, S phi);

/// Derivative of one bounce in canonical (s, r) coordinates, r = -cos phi:
///   [[-l11/l12,            1/l12   ],
///    [(l11 l22 - l12^2)/l12, -l22/l12]]
/// Unit determinant by construction.  Throws TwistDegenerate when the
/// off-diagonal length partial collapses (grazing chord).
template <class S>
Mat2<S> jacobian(Boundary<S> const& b, S theta_from, S theta_to);

Mat2<double> jacobian_fd(Boundary<double> const& b, double theta_from, double theta_to,
                         double h);

/// Boundary-adapted coordinates in which near-tangent dynamics is a near
/// translation: x advances by the curvature^(2/3) arclength fraction, and
/// y = 4 kappa^(-1/3) sin(phi/2) / C with C the full adapted length.
template <class S>
struct AdaptedPoint {
  S x, y;
};

template <class S>
AdaptedPoint<S> adapted_point(Boundary<S> const& b, S theta, S phi);

// The instantiations live in the library; both scalars are provided.
extern template ChordData<double> chord(Boundary<double> const&, double, double);
extern template ChordData<DDouble> chord(Boundary<DDouble> const&, DDouble, DDouble);
extern template StepResult<double> step(Boundary<double> const&, double, double);
extern template StepResult<DDouble> step(Boundary<DDouble> const&, DDouble, DDouble);
extern template StepResult<double> unstep(Boundary<double> const&, double, double);
extern template StepResult<DDouble> unstep(Boundary<DDouble> const&, DDouble, DDouble);
extern template Mat2<double> jacobian(Boundary<double> const&, double, double);
extern template Mat2<DDouble> jacobian(Boundary<DDouble> const&, DDouble, DDouble);
extern template AdaptedPoint<double> adapted_point(Boundary<double> const&, double, double);
extern template AdaptedPoint<DDouble> adapted_point(Boundary<DDouble> const&, DDouble, DDouble);

}  // namespace mlspec
