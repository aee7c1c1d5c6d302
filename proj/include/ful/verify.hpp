#pragma once

// Cross-module verification gates: each one pairs an implementation route
// with an independent oracle (exact simulator vs normal forms, direct P
// iteration vs skew product, direct wave propagation vs reduced Floquet
// action, fitted growth vs the analytic quadratic form) and reports
// pass/fail at configurable scale.

#include <chrono>
#include <cmath>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "ful/adiabatic.hpp"
#include "ful/circle.hpp"
#include "ful/classical.hpp"
#include "ful/common.hpp"
#include "ful/floquet.hpp"
#include "ful/model.hpp"
#include "ful/propagator.hpp"

namespace ful {

// Follow the exact flow from a section point through the next singularity
// and return the measured section coordinates there. Uses only the
// event-driven simulator and the coordinate change, never P1/P2.
inline NormalPoint exact_crossing(const NormalPoint& start, const ModelParams& mp) {
  double theta0 = start.section == Section::R0 ? start.tau / start.I : 0.5 + start.tau / start.I;
  auto [t0, v0] = from_adiabatic(AdiabaticPoint{theta0, start.I}, mp);
  double target = start.section == Section::R0 ? 0.5 : 1.0;

  CollisionRecord rec{t0, v0, false};
  double theta_prev = theta0;
  double wraps = 0.0;
  for (int guard = 0; guard < 100000000; ++guard) {
    auto seq = simulate(rec, mp, StopRule::n_collisions(1));
    rec = seq.back();
    AdiabaticPoint ap = to_adiabatic(rec.t, rec.v, mp);
    double theta_abs = ap.theta + wraps;
    if (ap.theta < theta_prev) {
      wraps += 1.0;
      theta_abs += 1.0;
    }
    theta_prev = ap.theta;
    if (theta_abs >= target) {
      double tau = ap.I * (theta_abs - target);
      return NormalPoint{mod1(tau), ap.I,
                         start.section == Section::R0 ? Section::RT : Section::R0};
    }
  }
  throw error("crossing search did not terminate");
}

struct GateResult {
  std::string name;
  bool pass = false;
  double seconds = 0.0;
  std::string details;
};

struct VerifyOptions {
  std::uint64_t seed = 20250530;
  // criterion 1
  long long adiabatic_samples = 500;
  double adiabatic_tol_I = 1e-9;
  double adiabatic_tol_theta = 1e-9;
  // criterion 2
  long long crossing_samples = 500;
  double crossing_tol_tau = 1e-8;
  double crossing_tol_I = 1e-8;
  // criteria 3-4
  long long circle_draws = 100;
  long long circle_steps = 10000;
  double circle_tol_D = 1e-10;
  double skew_tol_tau = 1e-9;
  // criterion 5
  long long escape_periods = 1000;
  long long bounded_periods = 10000;
  // criterion 6
  long long cocycle_draws = 20;
  long long cocycle_steps = 1000000;
  long long cocycle_min_returns = 100;
  double cocycle_max_ratio = 1e-2;
  // criterion 7
  int unitarity_max_q = 8;
  long long unitarity_x_samples = 100;
  double unitarity_tol = 1e-12;
  // criterion 8
  int band_grid = 1024;
  double band_tol_11 = 1e-8;
  double band_tol_12 = 1e-6;
  double eigen_residual_tol = 1e-10;
  // criterion 9
  int growth_modes_11 = 4096;
  long long growth_periods_11 = 200;
  int growth_modes_12 = 8192;
  long long growth_periods_12 = 100;
  double growth_rel_tol = 0.05;
  double growth_residual_tol = 1e-3;
  // criterion 10
  int cross_rep_modes = 4096;
  double cross_rep_tol = 1e-5;
};

namespace detail {

class GateTimer {
 public:
  GateTimer() : start_(std::chrono::steady_clock::now()) {}
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_;
};

inline ModelParams draw_params(std::mt19937_64& g) {
  std::uniform_real_distribution<double> uA(0.5, 2.0), uR(1.2, 4.0), uT(0.5, 2.0);
  double A = uA(g);
  return ModelParams(A, A * uR(g), uT(g));
}

inline ModelParams draw_resonant(std::mt19937_64& g, int q) {
  std::uniform_real_distribution<double> uA(0.5, 2.0), uT(0.5, 2.0);
  double A = uA(g);
  return ModelParams(A, A * (q + 1.0), uT(g));
}

// Start height that keeps the whole P orbit above the validity threshold,
// planned from an exact dry run of the skew product.
inline double plan_start_I(const CircleLayout& lay, double tau0, long long steps,
                           double I_min, int q) {
  double tau = tau0;
  long long S = 0, S_min = 0;
  for (long long j = 0; j < steps; ++j) {
    const auto& c = lay.comps[lay.find(tau)];
    S += c.eta;
    S_min = std::min(S_min, S);
    tau = mod1(tau + c.shift);
  }
  return I_min + 2.0 * q * (static_cast<double>(-S_min) + 2.0);
}

}  // namespace detail

// Criterion 1: along collision pairs away from the singular strips the
// adiabatic momentum is constant and theta advances by exactly 1/I.
inline GateResult gate_adiabatic_exactness(const VerifyOptions& opt) {
  detail::GateTimer timer;
  std::mt19937_64 g(opt.seed + 1);
  std::uniform_real_distribution<double> utheta(0.0, 1.0), uI(50.0, 500.0);
  long long checked = 0;
  double worst_I = 0.0, worst_theta = 0.0;
  while (checked < opt.adiabatic_samples) {
    ModelParams mp = detail::draw_params(g);
    double I0 = uI(g) * default_I_min(mp);
    double theta0 = utheta(g);
    // stay clear of the singular strips by a couple of collision spacings
    double margin = 3.0 / I0;
    if (std::fabs(theta0 - 0.5) < margin || theta0 > 1.0 - margin || theta0 < margin) continue;
    auto [t0, v0] = from_adiabatic(AdiabaticPoint{theta0, I0}, mp);
    CollisionRecord r1 = collision_map_f(t0, v0, mp);
    AdiabaticPoint a1 = to_adiabatic(r1.t, r1.v, mp);
    double dI = std::fabs(a1.I - I0);
    double theta1 = a1.theta < theta0 ? a1.theta + 1.0 : a1.theta;
    double dtheta = std::fabs(theta1 - theta0 - 1.0 / I0);
    worst_I = std::max(worst_I, dI / I0);
    worst_theta = std::max(worst_theta, dtheta);
    ++checked;
  }
  GateResult res;
  res.name = "adiabatic_exactness";
  res.pass = worst_I < opt.adiabatic_tol_I && worst_theta < opt.adiabatic_tol_theta;
  res.seconds = timer.seconds();
  std::ostringstream os;
  os << "samples=" << checked << " max|dI|/I=" << worst_I << " max|dtheta-1/I|=" << worst_theta;
  res.details = os.str();
  return res;
}

// Criterion 2: P1/P2 predictions against exact singularity crossings.
inline GateResult gate_normal_form_oracle(const VerifyOptions& opt) {
  detail::GateTimer timer;
  std::mt19937_64 g(opt.seed + 2);
  std::uniform_real_distribution<double> utau(0.02, 0.98), uI(2.0, 20.0);
  double worst_tau = 0.0, worst_I = 0.0;
  for (long long i = 0; i < opt.crossing_samples; ++i) {
    ModelParams mp = detail::draw_params(g);
    Section sec = (i % 2 == 0) ? Section::R0 : Section::RT;
    NormalPoint start{utau(g), uI(g) * default_I_min(mp), sec};
    NormalPoint predicted = sec == Section::R0 ? P1(start, mp) : P2(start, mp);
    NormalPoint measured = exact_crossing(start, mp);
    worst_tau = std::max(worst_tau, mod1_dist(predicted.tau, measured.tau));
    worst_I = std::max(worst_I, std::fabs(predicted.I - measured.I) / start.I);
  }
  GateResult res;
  res.name = "normal_form_oracle";
  res.pass = worst_tau < opt.crossing_tol_tau && worst_I < opt.crossing_tol_I;
  res.seconds = timer.seconds();
  std::ostringstream os;
  os << "samples=" << opt.crossing_samples << " max|dtau|=" << worst_tau
     << " max|dI|/I=" << worst_I;
  res.details = os.str();
  return res;
}

// Criterion 3: D = tau + I/(2q) is conserved by P.
inline GateResult gate_circle_invariance(const VerifyOptions& opt) {
  detail::GateTimer timer;
  std::mt19937_64 g(opt.seed + 3);
  std::uniform_real_distribution<double> utau(0.0, 1.0);
  std::uniform_int_distribution<int> uq(1, 5);
  double worst = 0.0;
  for (long long d = 0; d < opt.circle_draws; ++d) {
    int q = uq(g);
    ModelParams mp = detail::draw_resonant(g, q);
    double I_min = default_I_min(mp);
    double tau0 = utau(g);
    double D = utau(g);
    CircleLayout lay = build_layout(D, q);
    double I0 = detail::plan_start_I(lay, mod1(tau0 - 0.0), opt.circle_steps, I_min, q);
    // place the start exactly on the circle C_D
    double n0 = std::ceil((I0 + 2.0 * q * tau0) / (2.0 * q) - D);
    double I_start = 2.0 * q * (D + n0 - tau0);
    NormalPoint p{tau0, I_start, Section::R0};
    double D0 = circle_of(p, q).D;
    auto orbit = ful::detail::SectionOrbitDD::make(p, mp, q);
    DD inv2q = dd_ratio(1.0, 2.0 * q);
    for (long long j = 0; j < opt.circle_steps; ++j) {
      orbit.step();
      DD Dj = dd_mod1(dd_add(dd_mul(orbit.I, inv2q), orbit.tau));
      worst = std::max(worst, mod1_dist(Dj.hi, D0));
    }
  }
  GateResult res;
  res.name = "circle_invariance";
  res.pass = worst < opt.circle_tol_D;
  res.seconds = timer.seconds();
  std::ostringstream os;
  os << "draws=" << opt.circle_draws << " steps=" << opt.circle_steps << " max|dD|=" << worst;
  res.details = os.str();
  return res;
}

// Criterion 4: direct P iteration against the skew product (F, eta).
inline GateResult gate_skew_equivalence(const VerifyOptions& opt) {
  detail::GateTimer timer;
  std::mt19937_64 g(opt.seed + 4);
  std::uniform_real_distribution<double> utau(0.0, 1.0);
  std::uniform_int_distribution<int> uq(1, 5);
  long long mismatches = 0;
  double worst = 0.0;
  for (long long d = 0; d < opt.circle_draws; ++d) {
    int q = uq(g);
    ModelParams mp = detail::draw_resonant(g, q);
    double I_min = default_I_min(mp);
    double tau0 = utau(g);
    double D = utau(g);
    CircleLayout lay = build_layout(D, q);
    double I0_floor = detail::plan_start_I(lay, tau0, opt.circle_steps, I_min, q);
    double n0 = std::ceil((I0_floor + 2.0 * q * tau0) / (2.0 * q) - D);
    NormalPoint p{tau0, 2.0 * q * (D + n0 - tau0), Section::R0};
    SkewReport rep = verify_skew_equivalence(p, mp, q, opt.circle_steps);
    mismatches += rep.fiber_mismatches;
    worst = std::max(worst, rep.max_dtau);
  }
  GateResult res;
  res.name = "skew_equivalence";
  res.pass = mismatches == 0 && worst < opt.skew_tol_tau;
  res.seconds = timer.seconds();
  std::ostringstream os;
  os << "draws=" << opt.circle_draws << " steps=" << opt.circle_steps
     << " fiber_mismatches=" << mismatches << " max|dtau|=" << worst;
  res.details = os.str();
  return res;
}

// Criterion 5: Ulam escape and bounded orbits on the D = 1/2 circle.
inline GateResult gate_ulam_escape(const VerifyOptions& opt) {
  detail::GateTimer timer;
  ModelParams mp(1.0 / std::numbers::sqrt2, std::numbers::sqrt2, 1.0);
  const int q = 1;
  std::ostringstream os;
  bool pass = true;

  auto cls = classify_rational(1, 2, 0.1, q);
  pass = pass && cls.verdict == Verdict::escaping && cls.delta_eta == 1 && cls.Q == 2;
  os << "classify(tau0=0.1): deta=" << cls.delta_eta << " " << to_string(cls.verdict);

  auto section_series = [&](double tau0, double I0, long long periods) {
    double theta0 = tau0 / I0;
    auto [t0, v0] = from_adiabatic(AdiabaticPoint{theta0, I0}, mp);
    std::vector<double> I_at_R0{I0};
    CollisionRecord rec{t0, v0, false};
    double theta_prev = theta0;
    while (static_cast<long long>(I_at_R0.size()) <= periods) {
      rec = simulate(rec, mp, StopRule::n_collisions(1)).back();
      AdiabaticPoint ap = to_adiabatic(rec.t, rec.v, mp);
      if (ap.theta < theta_prev) I_at_R0.push_back(ap.I);  // wrapped past t = 0
      theta_prev = ap.theta;
    }
    return I_at_R0;
  };

  // escaping start: per-period gain 2q within 10 percent
  double gain_target = 2.0 * q;
  double tau_esc = 0.1;
  double I_esc = 2.0 * q * (0.5 + 25.0 - tau_esc);  // on the circle D = 1/2
  auto esc = section_series(tau_esc, I_esc, opt.escape_periods);
  double gain = (esc.back() - esc.front()) / static_cast<double>(esc.size() - 1);
  pass = pass && gain >= 0.9 * gain_target;
  os << " escape_gain=" << gain << " (target " << gain_target << ")";

  // bounded start: max momentum excursion below 2 * 2BkcalT
  double tau_bnd = 0.5;
  double I_bnd = 2.0 * q * (0.5 + 25.0 - tau_bnd);
  auto bnd = section_series(tau_bnd, I_bnd, opt.bounded_periods);
  double excursion = 0.0;
  for (double I : bnd) excursion = std::max(excursion, std::fabs(I - bnd.front()));
  double bound = 2.0 * (2.0 * mp.B * mp.k * mp.calT);
  pass = pass && excursion < bound;
  os << " bounded_excursion=" << excursion << " (bound " << bound << ")";

  GateResult res;
  res.name = "ulam_escape";
  res.pass = pass;
  res.seconds = timer.seconds();
  res.details = os.str();
  return res;
}

// Criterion 6: zero-mean cocycle and the recurrence surrogate.
inline GateResult gate_zero_mean_recurrence(const VerifyOptions& opt) {
  detail::GateTimer timer;
  std::mt19937_64 g(opt.seed + 6);
  std::uniform_real_distribution<double> uD(0.0, 1.0);
  std::ostringstream os;
  bool pass = true;

  double worst_mean = 0.0;
  for (int trial = 0; trial < 200; ++trial) {
    int q = 1 + static_cast<int>(uD(g) * 6.0);
    CircleLayout lay = build_layout(uD(g), q);
    double len = 0.0, mean = 0.0;
    for (const auto& c : lay.comps) {
      len += c.hi - c.lo;
      mean += (c.hi - c.lo) * c.eta;
    }
    pass = pass && std::fabs(len - 1.0) < 1e-12;
    worst_mean = std::max(worst_mean, std::fabs(mean));
  }
  pass = pass && worst_mean < 1e-12;
  os << "max|int eta|=" << worst_mean;

  long long min_returns = std::numeric_limits<long long>::max();
  double max_ratio = 0.0;
  for (long long d = 0; d < opt.cocycle_draws; ++d) {
    int q = 1 + static_cast<int>(d % 3);
    double D = uD(g);
    double tau0 = uD(g);
    auto rep = birkhoff_diagnostics(D, q, tau0, opt.cocycle_steps);
    min_returns = std::min(min_returns, rep.zero_returns);
    max_ratio = std::max(max_ratio, rep.final_ratio);
  }
  pass = pass && min_returns >= opt.cocycle_min_returns && max_ratio < opt.cocycle_max_ratio;
  os << " min_returns=" << min_returns << " max|S_N|/N=" << max_ratio;

  GateResult res;
  res.name = "zero_mean_recurrence";
  res.pass = pass;
  res.seconds = timer.seconds();
  res.details = os.str();
  return res;
}

// Criterion 7: unitarity of the Floquet matrices and the (1,2) gamma table.
inline GateResult gate_floquet_unitarity(const VerifyOptions& opt) {
  detail::GateTimer timer;
  std::mt19937_64 g(opt.seed + 7);
  std::uniform_real_distribution<double> ux(0.01, 0.99);
  double worst = 0.0;
  for (int q = 1; q <= opt.unitarity_max_q; ++q)
    for (int p = 1; p <= opt.unitarity_max_q; ++p) {
      if (std::gcd(p, q) != 1) continue;
      ModelParams mp = ModelParams::quantum_resonant(1.0, 2.0, p, q);
      long long per_pair = std::max<long long>(1, opt.unitarity_x_samples);
      for (long long i = 0; i < per_pair; ++i) {
        double x = ux(g);
        try {
          FloquetMatrices fm = build_matrices(mp, p, q, x);
          Eigen::MatrixXcd I = Eigen::MatrixXcd::Identity(q, q);
          worst = std::max(worst, (fm.S * fm.S.adjoint() - I).cwiseAbs().maxCoeff());
          worst = std::max(worst, (fm.R * fm.R.adjoint() - I).cwiseAbs().maxCoeff());
        } catch (const boundary_fold_error&) {
          --i;  // redraw
        }
      }
    }
  auto g12 = gamma_table(1, 2);
  double gamma_err = std::max(std::abs(g12.gamma[0] - Complex{0.0, 0.0}),
                              std::abs(g12.gamma[1] - Complex{1.0, 0.0}));
  GateResult res;
  res.name = "floquet_unitarity";
  res.pass = worst < opt.unitarity_tol && gamma_err < 1e-14;
  res.seconds = timer.seconds();
  std::ostringstream os;
  os << "max deviation=" << worst << " gamma12_err=" << gamma_err;
  res.details = os.str();
  return res;
}

// Criterion 8: quasi-energy band extents for the worked resonances.
inline GateResult gate_quasienergy_bands(const VerifyOptions& opt) {
  detail::GateTimer timer;
  const double pi = std::numbers::pi;
  std::ostringstream os;
  bool pass = true;

  auto grid = spectrum_grid(opt.band_grid);
  {
    ModelParams mp = ModelParams::quantum_resonant(1.0, 2.0, 1, 1);
    Spectrum spec = quasienergy_spectrum(mp, 1, 1, grid);
    double lo = spec.branches[0].rho_min, hi = spec.branches[0].rho_max;
    double err = std::max(std::fabs(lo + pi * pi / 32.0), std::fabs(hi - 0.0));
    pass = pass && err < opt.band_tol_11;
    os << "(1,1) band=[" << lo << "," << hi << "] err=" << err;
    for (const auto& smp : spec.samples) {
      FloquetMatrices fm = build_matrices(mp, 1, 1, smp.x0);
      Eigen::VectorXcd lam(1);
      lam[0] = ful::detail::cis(smp.xi[0]);
      double resid = ((fm.R * fm.S) * smp.Qmat - smp.Qmat * lam.asDiagonal()).cwiseAbs().maxCoeff();
      pass = pass && resid < opt.eigen_residual_tol;
    }
  }
  {
    ModelParams mp = ModelParams::quantum_resonant(1.0, 3.0, 1, 2);
    Spectrum spec = quasienergy_spectrum(mp, 1, 2, grid);
    double e_first = spec.branches[0].rho_first;
    double e_last = spec.branches[0].rho_last;
    double target_lo = -pi * pi / 2.0, target_hi = pi * pi / 6.0;
    double err = std::min(
        std::max(std::fabs(e_first - target_lo), std::fabs(e_last - target_hi)),
        std::max(std::fabs(e_first - target_hi), std::fabs(e_last - target_lo)));
    pass = pass && err < opt.band_tol_12;
    os << " (1,2) endpoints=[" << e_first << "," << e_last << "] err=" << err;
    double max_resid = 0.0;
    for (const auto& smp : spec.samples) {
      FloquetMatrices fm = build_matrices(mp, 1, 2, smp.x0);
      Eigen::VectorXcd lam(2);
      lam[0] = ful::detail::cis(smp.xi[0]);
      lam[1] = ful::detail::cis(smp.xi[1]);
      max_resid = std::max(max_resid, ((fm.R * fm.S) * smp.Qmat - smp.Qmat * lam.asDiagonal())
                                          .cwiseAbs()
                                          .maxCoeff());
    }
    pass = pass && max_resid < opt.eigen_residual_tol;
    os << " max_residual=" << max_resid;
  }

  GateResult res;
  res.name = "quasienergy_bands";
  res.pass = pass;
  res.seconds = timer.seconds();
  res.details = os.str();
  return res;
}

// Criterion 9: fitted quadratic growth against the analytic coefficient.
inline GateResult gate_quadratic_growth(const VerifyOptions& opt) {
  detail::GateTimer timer;
  std::ostringstream os;
  bool pass = true;

  struct Case {
    ModelParams mp;
    long long p;
    int q;
    int modes;
    long long periods;
  };
  std::vector<Case> cases{
      {ModelParams::quantum_resonant(1.0, 2.0, 1, 1), 1, 1, opt.growth_modes_11,
       opt.growth_periods_11},
      {ModelParams::quantum_resonant(1.0, 3.0, 1, 2), 1, 2, opt.growth_modes_12,
       opt.growth_periods_12},
  };
  for (const auto& c : cases) {
    PropagatorSetup setup = make_setup(c.mp);
    Wave w = Wave::mode(c.modes, 1);
    EnergySeries series = evolve_and_fit(w, setup, c.periods);
    auto grid = spectrum_grid(2048);
    std::vector<Complex> coeffs{Complex{1.0, 0.0}};
    WaveOnGrid phi = sample_wave_vector(coeffs, c.q, grid);
    double a_analytic = quad_coeff(c.mp, c.p, c.q, phi);
    double rel = std::fabs(series.a - a_analytic) / std::fabs(a_analytic);
    double resid = series.residual_rms / series.E.back();
    bool ok = !series.aborted && rel < opt.growth_rel_tol && resid < opt.growth_residual_tol;
    pass = pass && ok;
    os << "(" << c.p << "," << c.q << ") fitted=" << series.a << " analytic=" << a_analytic
       << " rel=" << rel << " resid=" << resid << "; ";
  }

  GateResult res;
  res.name = "quadratic_growth";
  res.pass = pass;
  res.seconds = timer.seconds();
  res.details = os.str();
  return res;
}

// Criterion 10: one jump-first period of direct propagation against the
// reduced Floquet action composed in the same order.
inline GateResult gate_cross_representation(const VerifyOptions& opt) {
  detail::GateTimer timer;
  std::ostringstream os;
  double worst = 0.0;

  struct Case {
    ModelParams mp;
    long long p;
    int q;
  };
  std::vector<Case> cases{{ModelParams::quantum_resonant(1.0, 2.0, 1, 1), 1, 1},
                          {ModelParams::quantum_resonant(1.0, 3.0, 1, 2), 1, 2}};
  for (const auto& c : cases) {
    int n = opt.cross_rep_modes;
    int m = 2 * n - 1;  // q | m+1 for q = 1, 2
    PropagatorSetup setup = make_setup(c.mp);
    Wave w = Wave::mode(n, 1);
    auto grid0 = sine_synthesis(w, m);
    Wave w_direct = w;
    full_period(w_direct, setup, KickOrder::jump_first);
    auto direct = sine_synthesis(w_direct, m);
    auto half1 = apply_reduced_floquet(grid0, c.mp, c.p, c.q, HalfPeriod::first,
                                       KickOrder::jump_first);
    auto reduced = apply_reduced_floquet(half1, c.mp, c.p, c.q, HalfPeriod::second,
                                         KickOrder::jump_first);
    double err = 0.0;
    for (std::size_t i = 0; i < direct.size(); ++i)
      err = std::max(err, std::abs(direct[i] - reduced[i]));
    worst = std::max(worst, err);
    os << "(" << c.p << "," << c.q << ") max_err=" << err << "; ";
  }

  GateResult res;
  res.name = "cross_representation";
  res.pass = worst < opt.cross_rep_tol;
  res.seconds = timer.seconds();
  res.details = os.str();
  return res;
}

inline std::vector<GateResult> run_all_gates(const VerifyOptions& opt) {
  return {gate_adiabatic_exactness(opt), gate_normal_form_oracle(opt),
          gate_circle_invariance(opt),   gate_skew_equivalence(opt),
          gate_ulam_escape(opt),         gate_zero_mean_recurrence(opt),
          gate_floquet_unitarity(opt),   gate_quasienergy_bands(opt),
          gate_quadratic_growth(opt),    gate_cross_representation(opt)};
}

}  // namespace ful
