#pragma once

// Invariant circles of the complete Poincare map under classical q-resonance:
// component cutting, the skew-product representation (F, eta) over an
// interval exchange map, rational-circle orbit classification, empirical
// recurrence diagnostics, and the reduction of F to a cocycle over a circle
// rotation.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <numeric>
#include <optional>
#include <vector>

#include "ful/adiabatic.hpp"
#include "ful/common.hpp"
#include "ful/model.hpp"

namespace ful {

enum class CircleKind { typical, atypical };

struct CircleId {
  double D = 0.0;  // tau + I/(2q) mod 1
  int q = 1;
  CircleKind kind = CircleKind::typical;
  int m = 0;  // D in [m/q, (m+1)/q)
};

inline CircleId circle_of(const NormalPoint& p, int q) {
  if (q < 1) throw config_error("resonance order q must be positive");
  double D = mod1_sub(p.tau, -p.I / (2.0 * q));
  double qD = q * D;
  double nearest = std::round(qD);
  CircleId id;
  id.D = D;
  id.q = q;
  if (std::fabs(qD - nearest) < q * 1e-12) {
    id.kind = CircleKind::atypical;
    id.m = static_cast<int>(nearest) % q;
  } else {
    id.kind = CircleKind::typical;
    id.m = std::min(q - 1, static_cast<int>(std::floor(qD)));
  }
  return id;
}

// One continuity interval of the circle. F translates it by `shift` mod 1 and
// the fiber moves by `eta`. Zero-length components are kept as records.
struct LayoutComponent {
  double lo = 0.0;
  double hi = 0.0;
  int s = 0;  // component label, 0 .. q+1
  int eta = 0;
  double shift = 0.0;
};

struct CircleLayout {
  double D = 0.0;
  int q = 1;
  int m = 0;
  CircleKind kind = CircleKind::typical;
  std::optional<double> secondary_cut;
  std::vector<LayoutComponent> comps;  // sorted, tiles [0, 1)

  // Index of the component strictly containing tau.
  int find(double tau, double cut_tol = 1e-13) const {
    if (!(tau >= 0.0 && tau < 1.0)) throw config_error("tau must lie in [0, 1)");
    for (std::size_t i = 0; i < comps.size(); ++i) {
      const auto& c = comps[i];
      if (tau >= c.lo && tau < c.hi) {
        if (tau - c.lo < cut_tol || c.hi - tau < cut_tol)
          throw cut_point_error("tau lies on a layout cut point");
        return static_cast<int>(i);
      }
    }
    throw cut_point_error("tau lies on a layout cut point");
  }

  // Half-open assignment without the tolerance guard (diagnostics only).
  int find_nothrow(double tau) const {
    for (std::size_t i = 0; i < comps.size(); ++i)
      if (tau >= comps[i].lo && tau < comps[i].hi) return static_cast<int>(i);
    return static_cast<int>(comps.size()) - 1;
  }
};

// Cut an invariant circle into the continuity components of P, with the
// secondary cut on the starting or ending component depending on which half
// of (m/q, (m+1)/q) the circle parameter D falls in.
inline CircleLayout build_layout(double D, int q) {
  if (q < 1) throw config_error("resonance order q must be positive");
  if (!(D >= 0.0 && D < 1.0)) throw config_error("D must lie in [0, 1)");

  CircleLayout lay;
  lay.D = D;
  lay.q = q;
  double qD = q * D;
  double nearest = std::round(qD);
  bool atypical = std::fabs(qD - nearest) < q * 1e-12;

  const double w = 1.0 / (q + 1.0);
  auto shift_of = [&](int s) {
    return mod1((q * (1.0 - 2.0 * D) + 2.0 * (lay.m + 1 - s)) / (q + 1.0));
  };

  if (atypical) {
    lay.kind = CircleKind::atypical;
    lay.m = static_cast<int>(nearest) % q;
    double u = static_cast<double>(lay.m) / (q + 1.0);
    for (int s = 1; s <= q + 1; ++s) {
      double lo = std::max(0.0, u - (lay.m + 1 - s) * w);
      double hi = std::min(1.0, u - (lay.m - s) * w);
      lay.comps.push_back({lo, hi, s, 0, shift_of(s)});
    }
    return lay;
  }

  lay.kind = CircleKind::typical;
  lay.m = std::min(q - 1, static_cast<int>(std::floor(qD)));
  const int m = lay.m;
  double u = qD / (q + 1.0);
  double hi0 = u - m * w;
  double lo_end = u + (q - m) * w;
  bool lower_half = D <= (m + 0.5) / q;  // closed upper endpoint

  if (lower_half) {
    double cut = 2.0 - (q * (1.0 - 2.0 * D) + 2.0 * (m + 1)) / (q + 1.0);
    cut = std::clamp(cut, lo_end, 1.0);
    lay.secondary_cut = cut;
    lay.comps.push_back({0.0, hi0, 0, +1, shift_of(0)});
    for (int s = 1; s <= q; ++s)
      lay.comps.push_back({u - (m + 1 - s) * w, u - (m - s) * w, s, 0, shift_of(s)});
    lay.comps.push_back({lo_end, cut, q + 1, -1, shift_of(q + 1)});
    lay.comps.push_back({cut, 1.0, q + 1, 0, shift_of(q + 1)});
  } else {
    double cut = 1.0 - (q * (1.0 - 2.0 * D) + 2.0 * (m + 1)) / (q + 1.0);
    cut = std::clamp(cut, 0.0, hi0);
    lay.secondary_cut = cut;
    lay.comps.push_back({0.0, cut, 0, 0, shift_of(0)});
    lay.comps.push_back({cut, hi0, 0, +1, shift_of(0)});
    for (int s = 1; s <= q; ++s)
      lay.comps.push_back({u - (m + 1 - s) * w, u - (m - s) * w, s, 0, shift_of(s)});
    lay.comps.push_back({lo_end, 1.0, q + 1, -1, shift_of(q + 1)});
  }
  return lay;
}

inline double F_base(double tau, const CircleLayout& lay) {
  const auto& c = lay.comps[lay.find(tau)];
  return mod1(tau + c.shift);
}

inline int eta(double tau, const CircleLayout& lay) {
  return lay.comps[lay.find(tau)].eta;
}

struct SkewState {
  double tau = 0.0;
  long long n = 0;  // floor number
};

inline SkewState skew_step(const SkewState& st, const CircleLayout& lay) {
  const auto& c = lay.comps[lay.find(st.tau)];
  return SkewState{mod1(st.tau + c.shift), st.n + c.eta};
}

// D is conserved by P up to tolerance.
inline bool verify_circle_invariance(const NormalPoint& p, const ModelParams& mp, int q,
                                     double tol = 1e-10, double I_min = -1.0) {
  CircleId before = circle_of(p, q);
  CircleId after = circle_of(P(p, mp, I_min), q);
  return mod1_dist(before.D, after.D) < tol;
}

namespace detail {

// Direct P iteration carried in double-double. P is parabolic, so plain
// double rounding in I shears into tau roughly like steps^{3/2} ulp and would
// swamp the comparison tolerances over 1e4 iterates. When the parameters are
// q-resonant to 1e-9 the section-map constants snap to their exact rational
// values 2q/(q+1) and 2q.
struct SectionOrbitDD {
  DD tau;
  DD I;
  DD cA;
  DD cB;

  static SectionOrbitDD make(const NormalPoint& start, const ModelParams& mp, int q) {
    SectionOrbitDD orb;
    orb.tau = dd_from(start.tau);
    orb.I = dd_from(start.I);
    double ratio = (mp.B - mp.A) / mp.A;
    if (q >= 1 && std::fabs(ratio - q) < 1e-9) {
      orb.cA = dd_ratio(2.0 * q, q + 1.0);
      orb.cB = dd_from(2.0 * q);
    } else {
      orb.cA = dd_from(2.0 * mp.A * mp.k * mp.calT);
      orb.cB = dd_from(2.0 * mp.B * mp.k * mp.calT);
    }
    return orb;
  }

  // one full period P = P2 . P1
  void step() {
    DD tb = dd_mod1(dd_sub(tau, dd_scale(I, 0.5)));
    I = dd_add(I, dd_mul(cA, dd_add(dd_scale(tb, 2.0), dd_from(-1.0))));
    DD tbb = dd_mod1(dd_sub(tb, dd_scale(I, 0.5)));
    I = dd_sub(I, dd_mul(cB, dd_add(dd_scale(tbb, 2.0), dd_from(-1.0))));
    tau = tbb;
  }
};

}  // namespace detail

struct SkewReport {
  long long steps = 0;
  long long fiber_mismatches = 0;
  double max_dtau = 0.0;
  double max_floor_drift = 0.0;  // distance of I/(2q) + tau - D from the nearest integer
};

// Iterate P directly and the skew product in parallel from the same point,
// comparing base coordinates and floor numbers each step.
inline SkewReport verify_skew_equivalence(const NormalPoint& start, const ModelParams& mp,
                                          int q, long long steps, double I_min = -1.0) {
  if (start.section != Section::R0) throw config_error("skew comparison starts on R0");
  if (I_min < 0.0) I_min = default_I_min(mp);
  CircleId id = circle_of(start, q);
  CircleLayout lay = build_layout(id.D, q);

  auto orbit = detail::SectionOrbitDD::make(start, mp, q);
  DD inv2q = dd_ratio(1.0, 2.0 * q);
  DD D_dd = dd_mod1(dd_add(orbit.tau, dd_mul(orbit.I, inv2q)));

  double fl0 = start.I / (2.0 * q) + start.tau - id.D;
  SkewState sk{start.tau, std::llround(fl0)};

  SkewReport rep;
  rep.max_floor_drift = std::fabs(fl0 - std::round(fl0));
  for (long long j = 0; j < steps; ++j) {
    if (orbit.I.hi < I_min)
      throw threshold_error("below validity threshold during skew comparison");
    orbit.step();
    sk = skew_step(sk, lay);

    DD fl = dd_sub(dd_add(dd_mul(orbit.I, inv2q), orbit.tau), D_dd);
    double drift = std::fabs(fl.hi - std::round(fl.hi));
    rep.max_floor_drift = std::max(rep.max_floor_drift, drift);
    if (drift > 0.25) throw error("floor number drifted by more than 0.25");
    if (std::llround(fl.hi) != sk.n) ++rep.fiber_mismatches;
    rep.max_dtau = std::max(rep.max_dtau, mod1_dist(orbit.tau.hi, sk.tau));
    ++rep.steps;
  }
  return rep;
}

enum class Verdict { escaping, bounded, descending };

inline const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::escaping: return "escaping";
    case Verdict::bounded: return "bounded";
    default: return "descending";
  }
}

struct ClassificationResult {
  Verdict verdict = Verdict::bounded;
  long long delta_eta = 0;  // cocycle sum over one combinatorial period
  long long Q = 0;          // lcm(s, q+1) iterate bound
  std::vector<double> visited;
};

// Locate escaping/bounded orbits on the rational circle D = r/s. The F
// orbit of tau0 lives on the lattice tau0 + Z/(s(q+1)), so the iteration is
// carried in exact integer offsets and the first repeat is detected exactly.
inline ClassificationResult classify_rational(long long r, long long s, double tau0, int q) {
  if (s <= 0 || r < 0 || r >= s) throw config_error("require 0 <= r < s");
  if (std::gcd(r, s) != 1) throw config_error("r and s must be coprime");
  if (q < 1) throw config_error("resonance order q must be positive");

  const double D = static_cast<double>(r) / static_cast<double>(s);
  CircleLayout lay = build_layout(D, q);
  const long long M = s * (q + 1);

  ClassificationResult res;
  res.Q = std::lcm(s, static_cast<long long>(q + 1));

  std::vector<int> etas;
  std::map<long long, long long> seen;  // lattice offset -> first index
  long long k = 0;
  long long n1 = -1, n2 = -1;
  // The orbit repeats within M+1 points by pigeonhole on the exact lattice.
  // lcm(s, q+1) is reported as Q but does not always bound the period: for
  // q = 2, D = 1/3 the orbit has period 6 while lcm(3, 3) = 3.
  for (long long j = 0; j <= M; ++j) {
    double tau = mod1(tau0 + static_cast<double>(k) / static_cast<double>(M));
    res.visited.push_back(tau);
    auto it = seen.find(k);
    if (it != seen.end()) {
      n1 = it->second;
      n2 = j;
      break;
    }
    seen.emplace(k, j);
    const auto& c = lay.comps[lay.find(tau)];
    etas.push_back(c.eta);
    long long dk = q * (s - 2 * r) + 2 * s * (lay.m + 1 - c.s);
    k = ((k + dk) % M + M) % M;
  }
  if (n2 < 0) throw error("no repeat within the lattice bound");

  long long sum = 0;
  for (long long j = n1; j < n2; ++j) sum += etas[static_cast<std::size_t>(j)];
  res.delta_eta = sum;
  res.verdict = sum > 0 ? Verdict::escaping : (sum == 0 ? Verdict::bounded : Verdict::descending);
  return res;
}

struct BirkhoffReport {
  long long steps = 0;
  double discrepancy = 0.0;     // star discrepancy of the base orbit
  long long zero_returns = 0;   // number of j >= 1 with S_j = 0
  double final_ratio = 0.0;     // |S_N| / N
  double max_tail_ratio = 0.0;  // max over j >= N/2 of |S_j| / j
  long long final_sum = 0;
};

// Empirical surrogate for ergodicity of F and recurrence of the cocycle.
inline BirkhoffReport birkhoff_diagnostics(double D, int q, double tau0, long long N) {
  if (N < 1) throw config_error("N must be positive");
  CircleLayout lay = build_layout(D, q);

  std::vector<double> orbit;
  orbit.reserve(static_cast<std::size_t>(N));
  BirkhoffReport rep;
  rep.steps = N;
  double tau = mod1(tau0);
  long long S = 0;
  for (long long j = 1; j <= N; ++j) {
    orbit.push_back(tau);
    const auto& c = lay.comps[lay.find_nothrow(tau)];
    S += c.eta;
    if (S == 0) ++rep.zero_returns;
    if (2 * j >= N)
      rep.max_tail_ratio = std::max(rep.max_tail_ratio,
                                    std::fabs(static_cast<double>(S)) / static_cast<double>(j));
    tau = mod1(tau + c.shift);
  }
  rep.final_sum = S;
  rep.final_ratio = std::fabs(static_cast<double>(S)) / static_cast<double>(N);

  std::sort(orbit.begin(), orbit.end());
  double disc = 0.0;
  const double n = static_cast<double>(orbit.size());
  for (std::size_t i = 0; i < orbit.size(); ++i) {
    double hi = (i + 1.0) / n - orbit[i];
    double lo = orbit[i] - static_cast<double>(i) / n;
    disc = std::max({disc, hi, lo});
  }
  rep.discrepancy = disc;
  return rep;
}

// Reduction of the doubled base map to h(x, k) = (x + 2 kappa, k + phi(x)):
// kappa = {-2qD} and phi a three-interval step function with zero mean.
struct SkewReduction {
  double kappa = 0.0;
  std::array<double, 2> breakpoints{};  // interval ends: [0,b0), [b0,b1), [b1,1)
  std::array<int, 3> phi_values{};

  int phi(double x) const {
    x = mod1(x);
    if (x < breakpoints[0]) return phi_values[0];
    if (x < breakpoints[1]) return phi_values[1];
    return phi_values[2];
  }
};

inline SkewReduction reduce_to_h(double D, int q) {
  if (q < 1) throw config_error("resonance order q must be positive");
  double kappa = mod1(-2.0 * q * D);
  if (kappa < 1e-12 || std::fabs(kappa - 0.5) < 1e-12 || kappa > 1.0 - 1e-12)
    throw config_error("degenerate: kappa in {0, 1/2}");
  SkewReduction red;
  red.kappa = kappa;
  if (kappa < 0.5) {
    red.breakpoints = {1.0 - 2.0 * kappa, 1.0 - kappa};
    red.phi_values = {0, +1, -1};
  } else {
    red.breakpoints = {1.0 - kappa, 2.0 - 2.0 * kappa};
    red.phi_values = {+1, -1, 0};
  }
  return red;
}

}  // namespace ful
