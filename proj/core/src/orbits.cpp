#include "mlspec/orbits.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <string>

#include "mlspec/errors.hpp"

namespace mlspec {
namespace {

constexpr double kTwoPiD = 6.283185307179586;

template <class S>
struct ChainState {
  std::vector<ChordData<S>> cd;
  std::vector<S> g, gp;   // vertex speed and its derivative
  std::vector<S> grad;    // stationarity gradient at the free vertices
  double res = 0.0;       // sup norm of grad
  S length{};
};

// Chords and gradient of the total length for a cyclic chain of q lifted
// angles closing with shift 2 pi p.  Free vertices: all q of them.
template <class S>
void eval_cyclic(Boundary<S> const& b, std::vector<S> const& v, S shift, ChainState<S>& st) {
  size_t q = v.size();
  st.cd.resize(q);
  st.g.resize(q);
  st.gp.resize(q);
  st.grad.resize(q);
  st.length = S(0.0);
  for (size_t i = 0; i < q; ++i) {
    S to = (i + 1 < q) ? v[i + 1] : v[0] + shift;
    st.cd[i] = chord(b, v[i], to);
    st.length = st.length + st.cd[i].length;
    st.g[i] = b.speed(v[i]);
    st.gp[i] = b.speed_derivative(v[i]);
  }
  st.res = 0.0;
  for (size_t i = 0; i < q; ++i) {
    size_t prev = (i + q - 1) % q;
    st.grad[i] = st.g[i] * (st.cd[prev].d2 + st.cd[i].d1);
    st.res = std::max(st.res, std::fabs(to_double(st.grad[i])));
  }
}

// Same for a pinned chain: first and last entries are boundary data, the
// gradient lives on indices 1..n-2.
template <class S>
void eval_pinned(Boundary<S> const& b, std::vector<S> const& z, ChainState<S>& st) {
  size_t n = z.size();
  st.cd.resize(n - 1);
  st.g.resize(n);
  st.gp.resize(n);
  st.grad.assign(n, S(0.0));
  st.length = S(0.0);
  for (size_t i = 0; i + 1 < n; ++i) {
    st.cd[i] = chord(b, z[i], z[i + 1]);
    st.length = st.length + st.cd[i].length;
  }
  st.res = 0.0;
  for (size_t i = 1; i + 1 < n; ++i) {
    st.g[i] = b.speed(z[i]);
    st.gp[i] = b.speed_derivative(z[i]);
    st.grad[i] = st.g[i] * (st.cd[i - 1].d2 + st.cd[i].d1);
    st.res = std::max(st.res, std::fabs(to_double(st.grad[i])));
  }
}

template <class S>
bool gaps_ordered(std::vector<S> const& v, S shift, bool cyclic, double floor_gap) {
  size_t n = v.size();
  size_t last = cyclic ? n : n - 1;
  for (size_t i = 0; i < last; ++i) {
    S to = (i + 1 < n) ? v[i + 1] : v[0] + shift;
    double gap = to_double(to - v[i]);
    if (!(gap > floor_gap) || !(gap < kTwoPiD - floor_gap)) return false;
  }
  return true;
}

template <class T, class Rhs>
std::vector<Rhs> solve_shifted(T matrix, std::vector<Rhs> const& rhs) {
  // The chain Hessian is negative definite near a maximizer; when elimination
  // hits a zero pivot (round tables, saddle passages) push the spectrum away
  // from zero and retry.
  double scale = 0.0;
  for (auto const& d : matrix.diag) scale = std::max(scale, std::fabs(to_double(d)));
  double mu = 1e-10 * std::max(scale, 1.0);
  for (int attempt = 0;; ++attempt) {
    try {
      if constexpr (std::is_same_v<T, CyclicTridiagonal<Rhs>>) {
        return solve_cyclic_tridiagonal(matrix, rhs);
      } else {
        return solve_sym_tridiagonal(matrix, rhs);
      }
    } catch (SingularSystem const&) {
      if (attempt >= 3) throw;
      for (auto& d : matrix.diag) d = d - Rhs(mu);
      mu *= 100.0;
    }
  }
}

// Damped Newton driving the stationarity gradient of the total chord length
// to the rounding floor.  `v` holds every vertex; for the pinned variant the
// two end entries stay untouched.  Returns the final state.
template <class S>
ChainState<S> newton_chain(Boundary<S> const& b, std::vector<S>& v, S shift, bool cyclic,
                           double floor_gap, int rounds, char const* who) {
  ChainState<S> st;
  if (!gaps_ordered(v, shift, cyclic, floor_gap))
    throw OrderingViolated(std::string(who) + ": seed vertices are not in convex order");
  if (cyclic)
    eval_cyclic(b, v, shift, st);
  else
    eval_pinned(b, v, st);

  double tol = 10.0 * ScalarTraits<S>::epsilon() * std::max(1.0, std::fabs(to_double(st.length)));
  size_t n = v.size();
  std::vector<S> trial(n);
  ChainState<S> ts;

  for (int round = 0; round < rounds; ++round) {
    if (st.res <= tol) return st;

    size_t m = cyclic ? n : n - 2;  // free vertex count
    std::vector<S> rhs(m);
    std::vector<S> delta;
    if (cyclic) {
      CyclicTridiagonal<S> h;
      h.diag.resize(m);
      h.off.resize(m);
      for (size_t i = 0; i < m; ++i) {
        size_t prev = (i + m - 1) % m;
        h.diag[i] = st.g[i] * st.g[i] * (st.cd[prev].d22 + st.cd[i].d11) +
                    st.gp[i] * (st.cd[prev].d2 + st.cd[i].d1);
        h.off[i] = st.g[i] * st.g[(i + 1) % m] * st.cd[i].d12;
        rhs[i] = -st.grad[i];
      }
      delta = solve_shifted(h, rhs);
    } else {
      SymTridiagonal<S> h;
      h.diag.resize(m);
      h.off.resize(m - 1);
      for (size_t i = 1; i + 1 < n; ++i) {
        h.diag[i - 1] = st.g[i] * st.g[i] * (st.cd[i - 1].d22 + st.cd[i].d11) +
                        st.gp[i] * (st.cd[i - 1].d2 + st.cd[i].d1);
        if (i + 2 < n) h.off[i - 1] = st.g[i] * st.g[i + 1] * st.cd[i].d12;
        rhs[i - 1] = -st.grad[i];
      }
      delta = solve_shifted(h, rhs);
    }

    // Near-singular solves (round tables, saddle passages) can fling the step
    // along a soft mode; cap it at half the mean gap, keeping the direction.
    double mean_gap = cyclic ? to_double(shift) / double(n)
                             : (to_double(v.back()) - to_double(v.front())) / double(n - 1);
    double dmax = 0.0;
    for (auto const& d : delta) dmax = std::max(dmax, std::fabs(to_double(d)));
    if (dmax > 0.5 * mean_gap) {
      S scale = from_double<S>(0.5 * mean_gap / dmax);
      for (auto& d : delta) d = scale * d;
    }

    bool accepted = false;
    double t = 1.0;
    for (int ls = 0; ls < 45; ++ls, t *= 0.5) {
      S ts_scale = from_double<S>(t);
      if (cyclic) {
        for (size_t i = 0; i < n; ++i) trial[i] = v[i] + ts_scale * delta[i];
      } else {
        trial = v;
        for (size_t i = 1; i + 1 < n; ++i) trial[i] = v[i] + ts_scale * delta[i - 1];
      }
      if (!gaps_ordered(trial, shift, cyclic, floor_gap)) continue;
      if (cyclic)
        eval_cyclic(b, trial, shift, ts);
      else
        eval_pinned(b, trial, ts);
      if (ts.res <= tol || ts.res < st.res * (1.0 - 0.25 * t)) {
        v.swap(trial);
        st = ts;
        accepted = true;
        break;
      }
    }
    if (!accepted)
      throw NoConvergence(std::string(who) + ": line search stalled at residual " +
                          std::to_string(st.res));
  }
  if (st.res <= tol) return st;
  throw NoConvergence(std::string(who) + ": residual " + std::to_string(st.res) +
                      " above tolerance " + std::to_string(tol));
}

// Move one vertex between fixed neighbors onto the reflection law.  The
// residual is positive as x approaches a and negative as x approaches c, so
// a bracket-guarded Newton cannot escape.
template <class S>
S relax_vertex(Boundary<S> const& b, S a, S x0, S c, double floor_gap) {
  double eps = ScalarTraits<S>::epsilon();
  // Never park the vertex closer than a sliver of the span to either
  // neighbor; a blocked root is left for the chain Newton to finish.
  S margin = mul_pwr2(c - a, 0.0009765625);
  if (to_double(margin) < floor_gap) margin = from_double<S>(floor_gap);
  S lo = a + margin, hi = c - margin;
  // Both adjacent gaps must also stay a hair under a full turn, or the
  // configuration stops being an ordered cyclic chain.
  S ceil_gap = two_pi_const<S>() - margin;
  if (!(to_double(c - lo) < to_double(ceil_gap))) lo = c - ceil_gap;
  if (!(to_double(hi - a) < to_double(ceil_gap))) hi = a + ceil_gap;
  if (!(to_double(hi - lo) > 0.0)) return x0;
  S x = x0;
  if (!(to_double(lo - x) < 0.0) || !(to_double(x - hi) < 0.0))
    x = mul_pwr2(lo + hi, 0.5);
  for (int it = 0; it < 80; ++it) {
    ChordData<S> left = chord(b, a, x);
    ChordData<S> right = chord(b, x, c);
    S g = b.speed(x);
    S f = g * (left.d2 + right.d1);
    double fd = to_double(f);
    if (std::fabs(fd) <= 32.0 * eps * (1.0 + std::fabs(to_double(g)))) return x;
    if (fd > 0.0)
      lo = x;
    else
      hi = x;
    S fp = g * g * (left.d22 + right.d11) +
           b.speed_derivative(x) * (left.d2 + right.d1);
    S xn = x - f / fp;
    if (!(to_double(lo - xn) < 0.0) || !(to_double(xn - hi) < 0.0))
      xn = mul_pwr2(lo + hi, 0.5);
    if (std::fabs(to_double(xn - x)) <= 4.0 * eps * (std::fabs(to_double(x)) + 6.3)) return xn;
    x = xn;
  }
  return x;
}

// Odd/even relaxation sweeps: within a half-sweep no two moving vertices are
// adjacent, so updates cannot cascade into a drift.  Robust far from the
// solution where the chain Newton direction can point uphill.
template <class S>
void relax_sweeps(Boundary<S> const& b, std::vector<S>& z, int max_sweeps, double target,
                  double floor_gap) {
  ChainState<S> probe;
  size_t n = z.size();
  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    eval_pinned(b, z, probe);
    if (probe.res <= target) return;
    for (size_t first : {size_t(1), size_t(2)})
      for (size_t i = first; i + 1 < n; i += 2)
        z[i] = relax_vertex(b, z[i - 1], z[i], z[i + 1], floor_gap);
  }
}

// Cyclic variant: neighbors wrap with the winding shift.  For odd counts the
// two-coloring has one adjacent same-color pair, which only costs a little
// ordering slack, not correctness.
template <class S>
void relax_sweeps_cyclic(Boundary<S> const& b, std::vector<S>& v, S shift, int max_sweeps,
                         double target, double floor_gap) {
  ChainState<S> probe;
  size_t n = v.size();
  if (n < 2) return;
  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    eval_cyclic(b, v, shift, probe);
    if (probe.res <= target) return;
    for (size_t first : {size_t(0), size_t(1)})
      for (size_t i = first; i < n; i += 2) {
        S a = (i == 0) ? v[n - 1] - shift : v[i - 1];
        S c = (i + 1 == n) ? v[0] + shift : v[i + 1];
        v[i] = relax_vertex(b, a, v[i], c, floor_gap);
      }
  }
}

void check_rotation(int p, int q) {
  if (q < 2 || p < 1 || p >= q || std::gcd(p, q) != 1)
    throw ConfigError("rotation number must be a reduced fraction p/q with 0 < p < q, q >= 2; got " +
                      std::to_string(p) + "/" + std::to_string(q));
}

// Shift by whole turns so the first vertex lands in [0, 2 pi), then start the
// cycle at the vertex with the smallest reduced angle.  Gaps are preserved
// exactly, so the configuration is the same closed polygon.
template <class S>
std::vector<S> canonical_cycle(std::vector<S> const& v, S shift) {
  size_t q = v.size();
  S two_pi = two_pi_const<S>();
  std::vector<S> gap(q), red(q);
  for (size_t i = 0; i < q; ++i) {
    S to = (i + 1 < q) ? v[i + 1] : v[0] + shift;
    gap[i] = to - v[i];
    S r = v[i] - two_pi * floor(v[i] / two_pi);
    if (to_double(r) < 0.0) r = r + two_pi;
    if (to_double(r) >= kTwoPiD) r = r - two_pi;
    red[i] = r;
  }
  size_t jstar = 0;
  for (size_t j = 1; j < q; ++j)
    if (to_double(red[j]) < to_double(red[jstar])) jstar = j;
  std::vector<S> out(q);
  out[0] = red[jstar];
  for (size_t k = 1; k < q; ++k) out[k] = out[k - 1] + gap[(jstar + k - 1) % q];
  return out;
}

// Two critical polygons are the same orbit iff some rotation of one lifted
// vertex sequence matches the other up to a whole number of turns; canonical
// forms alone can disagree when a vertex sits at the 0 / 2 pi seam.
template <class S>
double cycle_distance(PeriodicOrbit<S> const& a, PeriodicOrbit<S> const& c) {
  double best = HUGE_VAL;
  for (int r = 0; r < a.q; ++r) {
    double shift =
        kTwoPiD * std::round((to_double(c.angle(r)) - to_double(a.angles[0])) / kTwoPiD);
    double d = 0.0;
    for (int i = 0; i < a.q; ++i)
      d = std::max(d, std::fabs(to_double(c.angle(r + i)) - shift - to_double(a.angles[i])));
    best = std::min(best, d);
  }
  return best;
}

DomainSpec blend_round(DomainSpec const& s, double t) {
  DomainSpec out = s;
  auto fade = [t](std::vector<double>& modes) {
    for (auto& c : modes) c *= (1.0 - t);
  };
  if (s.kind == DomainKind::Ellipse) {
    double r = 0.5 * (s.a + s.b);
    out.a = s.a + t * (r - s.a);
    out.b = s.b + t * (r - s.b);
  }
  fade(out.cos_coeffs);
  fade(out.sin_coeffs);
  return out;
}

template <class S>
PeriodicOrbit<S> homotopy_solve(Boundary<S> const& b, int p, int q, SolveOptions const& opts) {
  static constexpr double kPath[] = {0.85, 0.7, 0.55, 0.4, 0.25, 0.12, 0.0};
  PeriodicOrbit<S> cur;
  bool have = false;
  for (double t : kPath) {
    Boundary<S> bt{t == 0.0 ? b.spec() : blend_round(b.spec(), t)};
    bool stepped = false;
    if (have) {
      try {
        cur = refine_periodic(bt, p, q, cur.angles, opts);
        stepped = true;
      } catch (Error const&) {
        // A broken path segment falls back to a fresh pool at this blend.
      }
    }
    if (!stepped) {
      auto cands = periodic_candidates(bt, p, q, opts);
      if (!cands.empty()) {
        cur = cands.front();
        have = true;
        stepped = true;
      }
    }
    if (t == 0.0 && !stepped)
      throw NoConvergence("solve_periodic: no start converged for " + std::to_string(p) + "/" +
                          std::to_string(q) + ", even from a near-round blend");
  }
  return cur;
}

template <class S>
S half_quadform(SymTridiagonal<S> const& w, std::vector<S> const& z) {
  S acc(0.0);
  for (size_t i = 0; i < w.diag.size(); ++i) acc = acc + w.diag[i] * z[i] * z[i];
  for (size_t i = 0; i < w.off.size(); ++i)
    acc = acc + mul_pwr2(w.off[i] * z[i] * z[i + 1], 2.0);
  return mul_pwr2(acc, 0.5);
}

// Newton on the cyclic chain from a seed, with a relaxation rescue when the
// line search stalls far from the solution, then canonicalize and evaluate.
template <class S>
PeriodicOrbit<S> finish_cycle(Boundary<S> const& b, std::vector<S> v, int p, int q,
                              SolveOptions const& opts, char const* who) {
  S shift = two_pi_const<S>() * S(double(p));
  double floor_gap = 1e-9 * kTwoPiD * double(p) / double(q);
  try {
    newton_chain(b, v, shift, true, floor_gap, opts.newton_rounds, who);
  } catch (NoConvergence const&) {
    relax_sweeps_cyclic(b, v, shift, 400, 1e-7, floor_gap);
    newton_chain(b, v, shift, true, floor_gap, opts.newton_rounds, who);
  }
  std::vector<S> canon = canonical_cycle(v, shift);
  ChainState<S> st;
  eval_cyclic(b, canon, shift, st);
  PeriodicOrbit<S> out;
  out.p = p;
  out.q = q;
  out.angles = std::move(canon);
  out.length = st.length;
  out.residual = st.res;
  return out;
}

}  // namespace

template <class S>
PeriodicOrbit<S> refine_periodic(Boundary<S> const& b, int p, int q,
                                 std::vector<S> const& seed_angles, SolveOptions const& opts) {
  check_rotation(p, q);
  if (seed_angles.size() != static_cast<size_t>(q))
    throw ConfigError("refine_periodic: seed has " + std::to_string(seed_angles.size()) +
                      " vertices, expected " + std::to_string(q));
  return finish_cycle(b, seed_angles, p, q, opts, "refine_periodic");
}

template <class S>
static void absorb_candidate(std::vector<PeriodicOrbit<S>>& found, PeriodicOrbit<S> orb) {
  for (auto& known : found) {
    if (cycle_distance(known, orb) < 1e-7) {
      if (orb.residual < known.residual) known = std::move(orb);
      return;
    }
  }
  found.push_back(std::move(orb));
}

template <class S>
static void multistart_pool(Boundary<S> const& b, int p, int q, SolveOptions const& opts,
                            std::vector<PeriodicOrbit<S>>& found) {
  std::mt19937_64 rng(opts.seed ^ (static_cast<unsigned long long>(p) << 32) ^
                      static_cast<unsigned long long>(q));
  std::uniform_real_distribution<double> jit(-0.5, 0.5);
  double gap_mean = kTwoPiD * double(p) / double(q);

  for (int start = 0; start < std::max(1, opts.starts); ++start) {
    std::vector<S> seed(q);
    double phase = kTwoPiD * double(start) / double(std::max(1, opts.starts));
    for (int i = 0; i < q; ++i) {
      double wobble = (start == 0) ? 0.0 : opts.jitter * gap_mean * jit(rng);
      seed[i] = from_double<S>(phase + gap_mean * i + wobble);
    }
    try {
      // Coordinate ascent first: it walks uphill in perimeter, so the Newton
      // polish that follows lands on length maximizers instead of whatever
      // saddle happens to sit nearest the fan seed.
      relax_sweeps_cyclic(b, seed, two_pi_const<S>() * S(double(p)), 80, 1e-5,
                          1e-9 * gap_mean);
      absorb_candidate(found, refine_periodic(b, p, q, seed, opts));
    } catch (Error const&) {
      continue;
    }
  }
}

// A p/q cycle and its time reversal share one vertex set; a Birkhoff-ordered
// cycle through sorted circle points z visits z[(k p) mod q] at bounce k.
template <class S>
static std::vector<S> birkhoff_seed(std::vector<S> const& lifted, int p, int q) {
  std::vector<S> sorted;
  sorted.reserve(lifted.size());
  for (S const& a : lifted) {
    S r = a - two_pi_const<S>() * floor(a / two_pi_const<S>());
    if (to_double(r) < 0.0) r = r + two_pi_const<S>();
    if (to_double(r) >= kTwoPiD) r = r - two_pi_const<S>();
    sorted.push_back(r);
  }
  std::sort(sorted.begin(), sorted.end(), [](S const& a, S const& c) {
    return to_double(a) < to_double(c);
  });
  std::vector<S> seed(q);
  for (int k = 0; k < q; ++k) {
    long idx = (long(k) * p) % q;
    long wind = (long(k) * p) / q;
    seed[k] = sorted[idx] + two_pi_const<S>() * S(double(wind));
  }
  return seed;
}

template <class S>
std::vector<PeriodicOrbit<S>> periodic_candidates(Boundary<S> const& b, int p, int q,
                                                  SolveOptions const& opts) {
  check_rotation(p, q);
  std::vector<PeriodicOrbit<S>> found;
  multistart_pool(b, p, q, opts, found);

  // Second pool in the reversed orientation: its cycles come back through the
  // shared vertex set, catching maximizers whose forward basins the phase grid
  // missed.
  if (q - p != p) {
    std::vector<PeriodicOrbit<S>> mirror;
    multistart_pool(b, q - p, q, opts, mirror);
    for (auto const& m : mirror) {
      try {
        absorb_candidate(found, refine_periodic(b, p, q, birkhoff_seed(m.angles, p, q), opts));
      } catch (Error const&) {
        continue;
      }
    }
  }

  std::sort(found.begin(), found.end(), [](auto const& a, auto const& c) {
    // Longest perimeter first; perimeter ties (symmetric tables) resolved by
    // the smaller base vertex so the pick is deterministic.
    double la = to_double(a.length), lc = to_double(c.length);
    double tol = 1e-11 * std::max({1.0, std::fabs(la), std::fabs(lc)});
    if (std::fabs(la - lc) > tol) return la > lc;
    return to_double(a.angles[0]) < to_double(c.angles[0]);
  });
  return found;
}

template <class S>
PeriodicOrbit<S> solve_periodic(Boundary<S> const& b, int p, int q, SolveOptions const& opts) {
  auto cands = periodic_candidates(b, p, q, opts);
  if (!cands.empty()) return cands.front();
  return homotopy_solve(b, p, q, opts);
}

namespace {

// Sample the n-fold cover of ref at fractional index positions, so the
// one-vertex deficit of the (n p, n q - 1) class spreads evenly over the
// whole chain instead of doubling a single gap.
template <class S>
std::vector<S> respaced_cover_seed(PeriodicOrbit<S> const& ref, int n) {
  int qn = n * ref.q - 1;
  std::vector<S> seed(qn);
  for (int i = 0; i < qn; ++i) {
    double t = double(i) * double(n * ref.q) / double(qn);
    long k = static_cast<long>(std::floor(t));
    seed[i] = ref.angle(k) + from_double<S>(t - double(k)) * (ref.angle(k + 1) - ref.angle(k));
  }
  return seed;
}

}  // namespace

template <class S>
PeriodicOrbit<S> punctured_cover_orbit(Boundary<S> const& b, PeriodicOrbit<S> const& ref, int n,
                                       SolveOptions const& opts) {
  if (n < 2) throw ConfigError("punctured_cover_orbit: need at least a double cover");
  return finish_cycle(b, respaced_cover_seed(ref, n), n * ref.p, n * ref.q - 1, opts,
                      "punctured_cover_orbit");
}

template <class S>
PeriodicOrbit<S> splice_continuation(Boundary<S> const& b, PeriodicOrbit<S> const& prev,
                                     PeriodicOrbit<S> const& ref, SolveOptions const& opts) {
  int q = ref.q;
  int m = prev.q;
  // Splice where one ref period closes best inside prev: the deepest point of
  // the tail, so the insertion perturbs the critical cycle least.
  int jstar = 0;
  double best = std::numeric_limits<double>::infinity();
  double turn = kTwoPiD * double(ref.p);
  for (int j = 0; j < m; ++j) {
    double closure =
        std::fabs(to_double(prev.angle(j + q)) - to_double(prev.angle(j)) - turn);
    if (closure < best) {
      best = closure;
      jstar = j;
    }
  }
  double pivot = to_double(prev.angle(jstar));
  double red_pivot = pivot - kTwoPiD * std::floor(pivot / kTwoPiD);
  int k0 = 0;
  double nearest = std::numeric_limits<double>::infinity();
  for (int k = 0; k < q; ++k) {
    double rk = to_double(ref.angle(k));
    rk -= kTwoPiD * std::floor(rk / kTwoPiD);
    double d = std::fabs(rk - red_pivot);
    d = std::min(d, kTwoPiD - d);
    if (d < nearest) {
      nearest = d;
      k0 = k;
    }
  }

  int target_p = prev.p + ref.p;
  int target_q = m + q;
  S lift = two_pi_const<S>() * S(double(ref.p));

  // Candidate seeds, most local first.  Far from the shadowing regime the
  // junction mismatch can park a block seed in the wrong basin, so each is
  // tried and the longest converged cycle -- the critical value of the class
  // is a maximum -- wins.
  std::vector<std::vector<S>> seeds;

  // Ref-shaped block anchored at the pivot vertex itself.
  {
    std::vector<S> seed;
    seed.reserve(size_t(target_q));
    for (int i = 0; i <= jstar; ++i) seed.push_back(prev.angle(i));
    for (int k = 1; k <= q; ++k)
      seed.push_back(prev.angle(jstar) + (ref.angle(k0 + k) - ref.angle(k0)));
    for (int i = jstar + 1; i < m; ++i) seed.push_back(prev.angle(i) + lift);
    seeds.push_back(std::move(seed));
  }

  // Ref block kept at its own vertex phases; the mismatch sits in the seams.
  {
    S base = two_pi_const<S>() *
             S(std::round((pivot - to_double(ref.angle(k0))) / kTwoPiD));
    std::vector<S> seed;
    seed.reserve(size_t(target_q));
    for (int i = 0; i <= jstar; ++i) seed.push_back(prev.angle(i));
    for (int k = 1; k <= q; ++k) seed.push_back(ref.angle(k0 + k) + base);
    for (int i = jstar + 1; i < m; ++i) seed.push_back(prev.angle(i) + lift);
    seeds.push_back(std::move(seed));
  }

  // When the target class is a punctured cover of ref, the evenly respaced
  // cover is available as a shape-free fallback.
  if (target_p % ref.p == 0) {
    int n = target_p / ref.p;
    if (n >= 2 && n * ref.q - 1 == target_q) seeds.push_back(respaced_cover_seed(ref, n));
  }

  PeriodicOrbit<S> winner;
  bool converged = false;
  std::string first_failure;
  for (auto& seed : seeds) {
    try {
      PeriodicOrbit<S> cand =
          finish_cycle(b, std::move(seed), target_p, target_q, opts, "splice_continuation");
      if (!converged || to_double(cand.length) > to_double(winner.length))
        winner = std::move(cand);
      converged = true;
    } catch (Error const& e) {
      if (first_failure.empty()) first_failure = e.what();
    }
  }
  if (!converged)
    throw NoConvergence("splice_continuation: no candidate seed converged (" + first_failure +
                        ")");
  return winner;
}

template <class S>
Mat2<S> monodromy(Boundary<S> const& b, PeriodicOrbit<S> const& orbit) {
  Mat2<S> acc = Mat2<S>::identity();
  for (int i = 0; i < orbit.q; ++i)
    acc = jacobian(b, orbit.angle(i), orbit.angle(i + 1)) * acc;
  return acc;
}

template <class S>
OrbitEigenData<S> eigendata(Mat2<S> const& mono) {
  OrbitEigenData<S> out;
  out.trace = trace(mono);
  out.residue = mul_pwr2(S(2.0) - out.trace, 0.25);
  out.hyperbolic = std::fabs(to_double(out.trace)) > 2.0 + 1e-10;
  if (out.hyperbolic) {
    EigenPair<S> e = eigen2(mono);
    out.lambda = e.lambda_small;
    out.stable = e.v_small;
    out.unstable = e.v_big;
  }
  return out;
}

template <class S>
SymTridiagonal<S> w_matrix(Boundary<S> const& b, PeriodicOrbit<S> const& orbit) {
  int q = orbit.q;
  std::vector<ChordData<S>> cd(q);
  for (int i = 0; i < q; ++i) cd[i] = chord(b, orbit.angle(i), orbit.angle(i + 1));
  SymTridiagonal<S> w;
  w.diag.resize(q + 1);
  w.off.resize(q);
  w.diag[0] = -cd[0].d11;
  for (int i = 1; i < q; ++i) w.diag[i] = -cd[i - 1].d22 - cd[i].d11;
  w.diag[q] = -cd[q - 1].d22;
  for (int i = 0; i < q; ++i) w.off[i] = -cd[i].d12;
  return w;
}

template <class S>
TailCoefficients<S> tail_coefficients(Boundary<S> const& b, PeriodicOrbit<S> const& orbit) {
  OrbitEigenData<S> ed = eigendata(monodromy(b, orbit));
  if (!ed.hyperbolic)
    throw NotHyperbolic("tail_coefficients: return map trace " +
                        std::to_string(to_double(ed.trace)) + " is not hyperbolic");
  SymTridiagonal<S> w = w_matrix(b, orbit);
  int q = orbit.q;
  TailCoefficients<S> out;
  out.z_plus.resize(q + 1);
  out.z_minus.resize(q + 1);
  Vec2<S> vp = ed.stable;   // the quadratic form is blind to the vectors' signs
  Vec2<S> vm = ed.unstable;
  out.z_plus[0] = vp.x;
  out.z_minus[0] = vm.x;
  for (int k = 1; k <= q; ++k) {
    Mat2<S> j = jacobian(b, orbit.angle(k - 1), orbit.angle(k));
    vp = j * vp;
    vm = j * vm;
    out.z_plus[k] = vp.x;
    out.z_minus[k] = vm.x;
  }
  out.c_plus = half_quadform(w, out.z_plus);
  out.c_minus = half_quadform(w, out.z_minus);
  return out;
}

template <class S>
HeteroclinicWindow<S> solve_heteroclinic(Boundary<S> const& b, PeriodicOrbit<S> const& orbit,
                                         int k_periods, int m_periods) {
  if (k_periods < 3 || m_periods < 3)
    throw ConfigError("solve_heteroclinic: need at least three periods on each side");
  OrbitEigenData<S> ed = eigendata(monodromy(b, orbit));
  if (!ed.hyperbolic)
    throw NotHyperbolic("solve_heteroclinic: return map trace " +
                        std::to_string(to_double(ed.trace)) +
                        " admits no transverse connection");
  double lam = std::fabs(to_double(ed.lambda));

  // Window vertices run from index -Kq+1 to Mq; the left end is pinned on
  // the orbit, the right end on its one-slot-ahead copy.  That makes
  // (K+M)q - 1 chords spanning exactly K+M periods of rotation.
  long q = orbit.q;
  long lo = -static_cast<long>(k_periods) * q + 1;
  long hi = static_cast<long>(m_periods) * q;
  size_t n = static_cast<size_t>(hi - lo) + 1;

  // Per-period contraction of the deviation from the periodic lift, sampled
  // where the deviation is clean: above the rounding floor, below the
  // linear-regime ceiling.
  auto measure_tail = [&](std::vector<S> const& z, long r) {
    double theta_scale =
        std::max(std::fabs(to_double(z.front())), std::fabs(to_double(z.back())));
    double dev_floor = 1e3 * ScalarTraits<S>::epsilon() * (1.0 + theta_scale);
    double dev_ceil = 0.02 * kTwoPiD * double(orbit.p) / double(orbit.q);
    std::vector<double> ratios;
    for (long j0 = lo + 1; j0 + q < 0; j0 += q) {
      double d0 = std::fabs(to_double(z[static_cast<size_t>(j0 - lo)] - orbit.angle(j0 + r)));
      double d1 =
          std::fabs(to_double(z[static_cast<size_t>(j0 + q - lo)] - orbit.angle(j0 + q + r)));
      if (d0 > dev_floor && d1 > dev_floor && d0 < dev_ceil && d1 < dev_ceil && d1 > d0)
        ratios.push_back(d0 / d1);
    }
    for (long j0 = hi - 1; j0 - q > 0; j0 -= q) {
      double d0 =
          std::fabs(to_double(z[static_cast<size_t>(j0 - lo)] - orbit.angle(j0 + r + 1)));
      double d1 = std::fabs(
          to_double(z[static_cast<size_t>(j0 - q - lo)] - orbit.angle(j0 - q + r + 1)));
      if (d0 > dev_floor && d1 > dev_floor && d0 < dev_ceil && d1 < dev_ceil && d1 > d0)
        ratios.push_back(d0 / d1);
    }
    if (ratios.empty()) return 0.0;
    double acc = 0.0;
    for (double v : ratios) acc += std::log(v);
    return std::exp(acc / double(ratios.size()));
  };

  double tau = double(q) * std::clamp(2.0 / std::max(0.15, -std::log(lam)), 1.0, 12.0);
  double floor_gap = 1e-9 * kTwoPiD * double(orbit.p) / double(orbit.q);

  HeteroclinicWindow<S> out;
  out.k_periods = k_periods;
  out.m_periods = m_periods;
  bool have = false;
  std::string first_failure;

  // Solve from one seed and keep it when it beats the incumbent.  Connections
  // come in several critical families and the barrier is the least action
  // among them, so every converged candidate competes on its action.
  auto attempt = [&](std::vector<S>&& z, long r) {
    ChainState<S> st;
    try {
      relax_sweeps(b, z, 60, 2e-3, floor_gap);
      try {
        st = newton_chain(b, z, S(0.0), false, floor_gap, 200, "solve_heteroclinic");
      } catch (NoConvergence const&) {
        // Grind the sweeps much further before giving Newton a second try.
        relax_sweeps(b, z, 400, 1e-7, floor_gap);
        st = newton_chain(b, z, S(0.0), false, floor_gap, 200, "solve_heteroclinic");
      }
    } catch (Error const& e) {
      if (first_failure.empty()) first_failure = e.what();
      return;
    }

    S barrier = S(double(k_periods + m_periods)) * orbit.length - st.length;
    if (have && !(to_double(barrier) < to_double(out.barrier))) return;
    have = true;
    out.first_index = lo + r;
    out.barrier = barrier;
    out.residual = st.res;
    out.tail_decay = measure_tail(z, r);
    out.angles = std::move(z);
  };

  // The transition can settle at any of the q slots of the cycle, and within
  // a slot the crossing may center on a vertex or on a chord.
  for (long r = 0; r < q; ++r) {
    for (double off : {0.0, 0.5}) {
      // Blend from the orbit to its index-shifted copy over a few contraction
      // scales around the middle of the window.
      std::vector<S> z(n);
      for (long j = lo; j <= hi; ++j) {
        S base = orbit.angle(j + r);
        double sig = 1.0 / (1.0 + std::exp(-(double(j) + off) / tau));
        z[static_cast<size_t>(j - lo)] =
            base + from_double<S>(sig) * (orbit.angle(j + r + 1) - base);
      }
      z.front() = orbit.angle(lo + r);
      z.back() = orbit.angle(hi + r + 1);
      attempt(std::move(z), r);
    }
  }

  // Blended seeds can miss the length-maximizing crossing when its profile
  // looks nothing like a smooth interpolation.  Finite cycles of class
  // (n p, n q - 1) shadow that crossing ever more closely as n grows, so a
  // moderate one, cut open far from its transition and padded with the
  // periodic tails, seeds the right basin.
  try {
    int n_rung = std::min(k_periods + m_periods, 12);
    while (n_rung >= 2 &&
           std::gcd(long(n_rung) * orbit.p, long(n_rung) * orbit.q - 1) != 1)
      --n_rung;
    if (n_rung >= 2) {
      PeriodicOrbit<S> rung = punctured_cover_orbit(b, orbit, 2);
      for (int m = 3; m <= n_rung; ++m) rung = splice_continuation(b, rung, orbit);

      long qr = rung.q;
      long tstar = 0;
      double dmax = 0.0;
      for (long i = 0; i < qr; ++i) {
        double d = std::fabs(to_double(rung.angle(i + q) - rung.angle(i)) -
                             kTwoPiD * double(orbit.p));
        if (d > dmax) {
          dmax = d;
          tstar = i;
        }
      }
      if (dmax > 1e-3 * kTwoPiD * double(orbit.p) / double(orbit.q)) {
        // Cut the cycle open near the antipode of the transition, at the
        // vertex sitting closest to a phase of the reference orbit; the phase
        // it lands on fixes the slot shift of the window.
        long c0 = (tstar + qr / 2) % qr;
        long c = c0;
        long kbest = 0;
        double ebest = std::numeric_limits<double>::infinity();
        for (long di = -q; di <= q; ++di) {
          long i = ((c0 + di) % qr + qr) % qr;
          for (long k = 0; k < q; ++k) {
            double e = std::fabs(
                std::remainder(to_double(rung.angle(i) - orbit.angle(k)), kTwoPiD));
            if (e < ebest) {
              ebest = e;
              c = i;
              kbest = k;
            }
          }
        }
        long block = qr + 1;
        long s = q * ((static_cast<long>(n) - block) / (2 * q));
        long r = ((kbest - lo - s) % q + q) % q;
        std::vector<S> z(n);
        S delta = orbit.angle(lo + s + r) - rung.angle(c);
        for (long j = lo; j < lo + s; ++j)
          z[static_cast<size_t>(j - lo)] = orbit.angle(j + r);
        for (long t = 0; t < block; ++t)
          z[static_cast<size_t>(s + t)] = rung.angle(c + t) + delta;
        for (long j = lo + s + block; j <= hi; ++j)
          z[static_cast<size_t>(j - lo)] = orbit.angle(j + r + 1);
        z.front() = orbit.angle(lo + r);
        z.back() = orbit.angle(hi + r + 1);
        attempt(std::move(z), r);
      }
    }
  } catch (Error const& e) {
    if (first_failure.empty()) first_failure = e.what();
  }
  if (!have)
    throw NoConvergence("solve_heteroclinic: no transition slot converged (" + first_failure +
                        ")");
  return out;
}

template struct PeriodicOrbit<double>;
template struct PeriodicOrbit<DDouble>;
template PeriodicOrbit<double> refine_periodic(Boundary<double> const&, int, int,
                                               std::vector<double> const&, SolveOptions const&);
template PeriodicOrbit<DDouble> refine_periodic(Boundary<DDouble> const&, int, int,
                                                std::vector<DDouble> const&, SolveOptions const&);
template std::vector<PeriodicOrbit<double>> periodic_candidates(Boundary<double> const&, int, int,
                                                                SolveOptions const&);
template std::vector<PeriodicOrbit<DDouble>> periodic_candidates(Boundary<DDouble> const&, int,
                                                                 int, SolveOptions const&);
template PeriodicOrbit<double> solve_periodic(Boundary<double> const&, int, int,
                                              SolveOptions const&);
template PeriodicOrbit<DDouble> solve_periodic(Boundary<DDouble> const&, int, int,
                                               SolveOptions const&);
template PeriodicOrbit<double> punctured_cover_orbit(Boundary<double> const&,
                                                     PeriodicOrbit<double> const&, int,
                                                     SolveOptions const&);
template PeriodicOrbit<DDouble> punctured_cover_orbit(Boundary<DDouble> const&,
                                                      PeriodicOrbit<DDouble> const&, int,
                                                      SolveOptions const&);
template PeriodicOrbit<double> splice_continuation(Boundary<double> const&,
                                                   PeriodicOrbit<double> const&,
                                                   PeriodicOrbit<double> const&,
                                                   SolveOptions const&);
template PeriodicOrbit<DDouble> splice_continuation(Boundary<DDouble> const&,
                                                    PeriodicOrbit<DDouble> const&,
                                                    PeriodicOrbit<DDouble> const&,
                                                    SolveOptions const&);
template Mat2<double> monodromy(Boundary<double> const&, PeriodicOrbit<double> const&);
template Mat2<DDouble> monodromy(Boundary<DDouble> const&, PeriodicOrbit<DDouble> const&);
template OrbitEigenData<double> eigendata(Mat2<double> const&);
template OrbitEigenData<DDouble> eigendata(Mat2<DDouble> const&);
template SymTridiagonal<double> w_matrix(Boundary<double> const&, PeriodicOrbit<double> const&);
template SymTridiagonal<DDouble> w_matrix(Boundary<DDouble> const&,
                                          PeriodicOrbit<DDouble> const&);
template TailCoefficients<double> tail_coefficients(Boundary<double> const&,
                                                    PeriodicOrbit<double> const&);
template TailCoefficients<DDouble> tail_coefficients(Boundary<DDouble> const&,
                                                     PeriodicOrbit<DDouble> const&);
template HeteroclinicWindow<double> solve_heteroclinic(Boundary<double> const&,
                                                       PeriodicOrbit<double> const&, int, int);
template HeteroclinicWindow<DDouble> solve_heteroclinic(Boundary<DDouble> const&,
                                                        PeriodicOrbit<DDouble> const&, int, int);

}  // namespace mlspec
