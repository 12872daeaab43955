#include "mlspec/boundary.hpp"

#include <algorithm>
#include <cmath>

#include "mlspec/errors.hpp"

namespace mlspec {

namespace {

// curvature^(2/3) for certified-positive curvature.
double pow_two_thirds(double k) { return std::cbrt(k * k); }
DDouble pow_two_thirds(DDouble k) { return exp(log(k) * 2.0 / 3.0); }

double pow_one_third(double k) { return std::cbrt(k); }
DDouble pow_one_third(DDouble k) { return exp(log(k) / 3.0); }

// Fourier coefficients of a smooth 2pi-periodic integrand from M uniform
// samples.  cos(k * theta_j) is looked up as the table entry (j*k mod M), so
// no trig recurrence error enters the sums; aliasing is negligible for
// analytic integrands at this M.
template <class S, class F>
PeriodicIntegral<S> build_integral(F const& f) {
  constexpr int M = 1024;  // power of two, see index masking below
  constexpr int kcap = 400;
  std::vector<S> fv(M), cj(M), sj(M);
  S const step = two_pi_const<S>() / double(M);
  for (int j = 0; j < M; ++j) {
    S th = step * double(j);
    sincos(th, sj[j], cj[j]);
    fv[j] = f(th);
  }

  PeriodicIntegral<S> out;
  S sum{};
  for (int j = 0; j < M; ++j) sum += fv[j];
  out.mean = sum / double(M);

  double const cutoff =
      ScalarTraits<S>::epsilon() * 1e-3 * (std::fabs(to_double(out.mean)) + 1.0);
  int quiet = 0;
  for (int k = 1; k <= kcap && quiet < 8; ++k) {
    S A{}, B{};
    for (int j = 0; j < M; ++j) {
      int idx = (j * k) & (M - 1);
      A += fv[j] * cj[idx];
      B += fv[j] * sj[idx];
    }
    A = A * (2.0 / M);
    B = B * (2.0 / M);
    out.ac.push_back(A);
    out.bs.push_back(B);
    if (std::fabs(to_double(A)) < cutoff && std::fabs(to_double(B)) < cutoff)
      ++quiet;
    else
      quiet = 0;
  }
  return out;
}

}  // namespace

template <class S>
S PeriodicIntegral<S>::cumulative(S theta) const {
  S acc = mean * theta;
  S c1, s1;
  if (!ac.empty()) {
    sincos(theta, s1, c1);
    S ck = c1, sk = s1;
    for (size_t k = 1; k <= ac.size(); ++k) {
      acc += (ac[k - 1] * sk + bs[k - 1] * (1.0 - ck)) / double(k);
      S cn = ck * c1 - sk * s1;
      sk = sk * c1 + ck * s1;
      ck = cn;
    }
  }
  return acc;
}

template <class S>
Boundary<S>::Boundary(DomainSpec const& spec) : spec_(spec), kind_(spec.kind) {
  size_t nmodes = std::max(spec.cos_coeffs.size(), spec.sin_coeffs.size());
  ck_.assign(nmodes, S{});
  sk_.assign(nmodes, S{});
  for (size_t i = 0; i < spec.cos_coeffs.size(); ++i) ck_[i] = from_double<S>(spec.cos_coeffs[i]);
  for (size_t i = 0; i < spec.sin_coeffs.size(); ++i) sk_[i] = from_double<S>(spec.sin_coeffs[i]);

  switch (kind_) {
    case DomainKind::Circle:
      circle_r_ = from_double<S>(spec.radius);
      if (nmodes) throw InvalidSpec("domain: circle takes no fourier modes");
      break;
    case DomainKind::Ellipse:
      ea_ = from_double<S>(spec.a);
      eb_ = from_double<S>(spec.b);
      eD_ = ea_ * ea_ - eb_ * eb_;
      break;
    case DomainKind::Fourier:
      base_ = from_double<S>(spec.base_radius);
      break;
  }

  certify();

  if (kind_ == DomainKind::Circle) {
    arc_.mean = circle_r_;  // s(theta) = R theta, exactly linear
    laz_.mean = pow_one_third(circle_r_);
  } else {
    arc_ = build_integral<S>([this](S th) { return speed(th); });
    laz_ = build_integral<S>(
        [this](S th) { return pow_two_thirds(curvature(th)) * speed(th); });
  }
}

template <class S>
void Boundary<S>::radius3(S theta, S& r, S& dr, S& ddr) const {
  switch (kind_) {
    case DomainKind::Circle:
      r = circle_r_;
      dr = S{};
      ddr = S{};
      return;
    case DomainKind::Ellipse: {
      S s, c;
      sincos(theta, s, c);
      S v = eb_ * eb_ + eD_ * (s * s);
      S w = sqrt(v);
      S ab = ea_ * eb_;
      S dv = eD_ * (2.0 * (s * c));          // D sin(2 theta)
      S ddv = 2.0 * eD_ * (c * c - s * s);   // 2 D cos(2 theta)
      r = ab / w;
      dr = -(ab * dv) / (2.0 * (v * w));
      ddr = -(ab * (2.0 * (v * ddv) - 3.0 * (dv * dv))) / (4.0 * (v * (v * w)));
      break;
    }
    case DomainKind::Fourier:
      r = base_;
      dr = S{};
      ddr = S{};
      break;
  }
  if (ck_.empty()) return;
  S s1, c1;
  sincos(theta, s1, c1);
  S ck = c1, sk = s1;
  for (size_t k = 1; k <= ck_.size(); ++k) {
    S dk = double(k);
    r += ck_[k - 1] * ck + sk_[k - 1] * sk;
    dr += dk * (sk_[k - 1] * ck - ck_[k - 1] * sk);
    ddr -= (dk * dk) * (ck_[k - 1] * ck + sk_[k - 1] * sk);
    S cn = ck * c1 - sk * s1;
    sk = sk * c1 + ck * s1;
    ck = cn;
  }
}

template <class S>
S Boundary<S>::radius(S theta) const {
  S r, dr, ddr;
  radius3(theta, r, dr, ddr);
  return r;
}

template <class S>
Vec2<S> Boundary<S>::position(S theta) const {
  S s, c;
  sincos(theta, s, c);
  S r = radius(theta);
  return {r * c, r * s};
}

template <class S>
Vec2<S> Boundary<S>::position_diff(S theta_from, S theta_to) const {
  S delta = theta_to - theta_from;
  S mid = (theta_to + theta_from) * 0.5;
  S sh, chh, sm, cm, sf, cf;
  sincos(delta * 0.5, sh, chh);
  sincos(mid, sm, cm);
  sincos(theta_from, sf, cf);

  S r_to = radius(theta_to);

  // r(to) - r(from) by difference identities, one term per ingredient.
  S rdiff{};
  if (kind_ == DomainKind::Ellipse) {
    S s2m = 2.0 * (sm * cm);   // sin(to + from)
    S sd = 2.0 * (sh * chh);   // sin(to - from)
    S s_t, c_t;
    sincos(theta_to, s_t, c_t);
    S vf = eb_ * eb_ + eD_ * (sf * sf);
    S vt = eb_ * eb_ + eD_ * (s_t * s_t);
    S wf = sqrt(vf), wt = sqrt(vt);
    S wdiff = (eD_ * (s2m * sd)) / (wt + wf);  // w(to) - w(from)
    rdiff = -((ea_ * eb_) * wdiff) / (wt * wf);
  }
  if (!ck_.empty()) {
    // c_k (cos k.to - cos k.from) + s_k (sin k.to - sin k.from)
    //   = 2 sin(k delta/2) (s_k cos(k mid) - c_k sin(k mid))
    S ckm = cm, skm = sm, ckh = chh, skh = sh;
    for (size_t k = 1; k <= ck_.size(); ++k) {
      rdiff += (2.0 * skh) * (sk_[k - 1] * ckm - ck_[k - 1] * skm);
      S cn = ckm * cm - skm * sm;
      skm = skm * cm + ckm * sm;
      ckm = cn;
      cn = ckh * chh - skh * sh;
      skh = skh * chh + ckh * sh;
      ckh = cn;
    }
  }

  // e_r(to) - e_r(from) = 2 sin(delta/2) * (-sin mid, cos mid)
  S f = 2.0 * (r_to * sh);
  return {rdiff * cf - f * sm, rdiff * sf + f * cm};
}

template <class S>
Vec2<S> Boundary<S>::derivative(S theta) const {
  S s, c;
  sincos(theta, s, c);
  S r, dr, ddr;
  radius3(theta, r, dr, ddr);
  return {dr * c - r * s, dr * s + r * c};
}

template <class S>
S Boundary<S>::speed(S theta) const {
  S r, dr, ddr;
  radius3(theta, r, dr, ddr);
  return sqrt(r * r + dr * dr);
}

template <class S>
S Boundary<S>::speed_derivative(S theta) const {
  S r, dr, ddr;
  radius3(theta, r, dr, ddr);
  return (dr * (r + ddr)) / sqrt(r * r + dr * dr);
}

template <class S>
Vec2<S> Boundary<S>::unit_tangent(S theta) const {
  Vec2<S> d = derivative(theta);
  S g = sqrt(d.x * d.x + d.y * d.y);
  return {d.x / g, d.y / g};
}

template <class S>
S Boundary<S>::curvature(S theta) const {
  S r, dr, ddr;
  radius3(theta, r, dr, ddr);
  S g2 = r * r + dr * dr;
  return (r * r + 2.0 * (dr * dr) - r * ddr) / (g2 * sqrt(g2));
}

template <class S>
void Boundary<S>::certify() {
  int const N = 4096;
  std::vector<double> kap(N);
  double rmin = 1e300;
  for (int i = 0; i < N; ++i) {
    S th = two_pi_const<S>() * (double(i) / N);
    S r, dr, ddr;
    radius3(th, r, dr, ddr);
    double rd = to_double(r);
    rmin = std::min(rmin, rd);
    kap[i] = to_double(curvature(th));
  }
  if (!(rmin > 0.0) || !std::isfinite(rmin))
    throw NotStrictlyConvex("boundary: radius must stay positive (origin inside)");
  double kmin = kap[0], kmax = kap[0], jump = 0.0;
  for (int i = 0; i < N; ++i) {
    kmin = std::min(kmin, kap[i]);
    kmax = std::max(kmax, kap[i]);
    jump = std::max(jump, std::fabs(kap[(i + 1) % N] - kap[i]));
  }
  // Positivity at the samples plus a modulus-of-continuity margin between
  // them; a curve failing this is not certifiably strictly convex.
  if (!(kmin > 0.0) || !std::isfinite(kmin) || kmin <= 2.0 * jump)
    throw NotStrictlyConvex("boundary: curvature not positively bounded below (min " +
                            std::to_string(kmin) + ", sample margin " +
                            std::to_string(2.0 * jump) + ")");
  kappa_min_ = kmin;
  kappa_max_ = kmax;
}

template <class S>
S Boundary<S>::angle_of_arclength(S s) const {
  S theta = s / arc_.mean;
  double tol = 50.0 * ScalarTraits<S>::epsilon() *
               (std::fabs(to_double(s)) + to_double(perimeter()));
  for (int it = 0; it < 60; ++it) {
    S err = arc_.cumulative(theta) - s;
    if (std::fabs(to_double(err)) <= tol) return theta;
    theta -= err / speed(theta);
  }
  throw NoConvergence("angle_of_arclength: newton stalled");
}

template <class S>
BoundarySample<S> Boundary<S>::evaluate(S s) const {
  BoundarySample<S> out;
  out.theta = angle_of_arclength(s);
  out.s = s;
  out.point = position(out.theta);
  out.unit_tangent = unit_tangent(out.theta);
  out.curvature = curvature(out.theta);
  return out;
}

template struct PeriodicIntegral<double>;
template struct PeriodicIntegral<DDouble>;
template class Boundary<double>;
template class Boundary<DDouble>;

}  // namespace mlspec
