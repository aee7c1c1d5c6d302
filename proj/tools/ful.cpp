// Command-line front end for the piecewise-linear Fermi-Ulam laboratory.
//
// Subcommands: ful classical simulate|poincare|classify|birkhoff,
//              ful quantum spectrum|evolve|coeff, ful verify.
// Scenarios are flat JSON files; every output file starts with a single
// comment line carrying the tool version and the resolved parameter block.
// Exit codes: 0 success, 1 failed verify gate, 2 configuration error,
// 3 numerical guard trip.

#include <CLI11.hpp>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <string>

#include "ful/circle.hpp"
#include "ful/classical.hpp"
#include "ful/floquet.hpp"
#include "ful/io.hpp"
#include "ful/model.hpp"
#include "ful/propagator.hpp"
#include "ful/verify.hpp"

namespace {

using nlohmann::json;

struct CliState {
  std::string config_path;
  std::string out_dir = ".";
  int threads = 1;
  std::uint64_t seed = 20250530;
  bool timestamp = false;
  json cfg;
};

json load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ful::config_error("cannot open scenario file: " + path);
  json cfg;
  try {
    in >> cfg;
  } catch (const std::exception& e) {
    throw ful::config_error(std::string("scenario is not valid JSON: ") + e.what());
  }
  if (!cfg.is_object()) throw ful::config_error("scenario must be a JSON object");
  return cfg;
}

void check_task(const json& cfg, const std::string& expected) {
  if (cfg.contains("task") && cfg.at("task").get<std::string>() != expected)
    throw ful::config_error("scenario task \"" + cfg.at("task").get<std::string>() +
                            "\" does not match subcommand \"" + expected + "\"");
}

std::string out_path(const CliState& st, const std::string& name) {
  std::filesystem::create_directories(st.out_dir);
  return (std::filesystem::path(st.out_dir) / name).string();
}

std::string note_for(const CliState& st, const ful::ModelParams& mp, const std::string& task) {
  std::string note = ful::header_note(mp, "task=" + task);
  if (st.timestamp) note += " time=" + std::to_string(std::time(nullptr));
  return note;
}

double get_or(const json& cfg, const char* key, double fallback) {
  return cfg.contains(key) ? cfg.at(key).get<double>() : fallback;
}

long long get_or_ll(const json& cfg, const char* key, long long fallback) {
  return cfg.contains(key) ? cfg.at(key).get<long long>() : fallback;
}

int resolve_q(const json& cfg, const ful::ModelParams& mp) {
  if (cfg.contains("q")) return cfg.at("q").get<int>();
  auto det = ful::detect_classical_resonance(mp, 64, get_or(cfg, "q_tol", 1e-9));
  if (!det)
    throw ful::config_error("parameters are not classically resonant; give q explicitly");
  return det->q;
}

ful::QuantumResonance resolve_pq(const json& cfg, const ful::ModelParams& mp) {
  auto det = ful::detect_quantum_resonance(mp, get_or_ll(cfg, "max_den", 64),
                                           get_or(cfg, "pq_tol", 1e-12));
  if (!det)
    throw ful::config_error(
        "parameters are not quantum resonant; use the (A, B, p, q) constructor form");
  return *det;
}

int run_classical_simulate(const CliState& st) {
  ful::ModelParams mp = ful::params_from_json(st.cfg);
  const json& cfg = st.cfg;
  if (!cfg.contains("t0") || !cfg.contains("v0"))
    throw ful::config_error("classical-simulate needs t0 and v0");
  ful::CollisionRecord start{cfg.at("t0").get<double>(), cfg.at("v0").get<double>(), false};

  ful::StopRule stop = ful::StopRule::n_collisions(1000);
  if (cfg.contains("stop")) {
    const json& s = cfg.at("stop");
    if (s.contains("n_collisions"))
      stop = ful::StopRule::n_collisions(s.at("n_collisions").get<long long>());
    else if (s.contains("t_max"))
      stop = ful::StopRule::t_max(s.at("t_max").get<double>());
    else if (s.contains("I_ceiling"))
      stop = ful::StopRule::I_ceiling(s.at("I_ceiling").get<double>());
    else if (s.contains("I_floor"))
      stop = ful::StopRule::I_floor(s.at("I_floor").get<double>());
    else
      throw ful::config_error("stop must give n_collisions, t_max, I_ceiling or I_floor");
  }

  auto records = ful::simulate(start, mp, stop);
  ful::CsvWriter csv(out_path(st, "simulate.csv"), "n,t,v,I,theta,singular",
                     note_for(st, mp, "classical-simulate"));
  for (std::size_t i = 0; i < records.size(); ++i) {
    auto ap = ful::to_adiabatic(records[i].t, records[i].v, mp);
    csv.row(static_cast<long long>(i), records[i].t, records[i].v, ap.I, ap.theta,
            records[i].singular ? 1 : 0);
  }
  return 0;
}

int run_classical_poincare(const CliState& st) {
  ful::ModelParams mp = ful::params_from_json(st.cfg);
  const json& cfg = st.cfg;
  if (!cfg.contains("tau0") || !cfg.contains("I0"))
    throw ful::config_error("classical-poincare needs tau0 and I0");
  ful::NormalPoint p{cfg.at("tau0").get<double>(), cfg.at("I0").get<double>(), ful::Section::R0};
  long long periods = get_or_ll(cfg, "periods", 1000);
  double I_min = get_or(cfg, "I_min", -1.0);

  ful::CsvWriter csv(out_path(st, "poincare.csv"), "k,tau,I",
                     note_for(st, mp, "classical-poincare"));
  csv.row(0LL, p.tau, p.I);
  for (long long k = 1; k <= periods; ++k) {
    p = ful::P(p, mp, I_min);
    csv.row(k, p.tau, p.I);
  }
  return 0;
}

int run_classical_classify(const CliState& st) {
  ful::ModelParams mp = ful::params_from_json(st.cfg);
  const json& cfg = st.cfg;
  if (!cfg.contains("D")) throw ful::config_error("classical-classify needs D as \"r/s\"");
  if (!cfg.at("D").is_string())
    throw ful::config_error("D must be a rational string \"r/s\" to stay exact");
  auto [r, s] = ful::parse_rational(cfg.at("D").get<std::string>());
  int q = resolve_q(cfg, mp);

  std::vector<double> tau0s;
  if (!cfg.contains("tau0"))
    throw ful::config_error("classical-classify needs tau0 (number or array)");
  if (cfg.at("tau0").is_array())
    tau0s = cfg.at("tau0").get<std::vector<double>>();
  else
    tau0s.push_back(cfg.at("tau0").get<double>());

  double D = static_cast<double>(r) / static_cast<double>(s);
  ful::CircleLayout lay = ful::build_layout(D, q);
  json jlay{{"D", D},
            {"r", r},
            {"s", s},
            {"q", q},
            {"kind", lay.kind == ful::CircleKind::typical ? "typical" : "atypical"},
            {"m", lay.m}};
  if (lay.secondary_cut) jlay["secondary_cut"] = *lay.secondary_cut;
  json comps = json::array();
  for (const auto& c : lay.comps)
    comps.push_back({{"lo", c.lo}, {"hi", c.hi}, {"s", c.s}, {"eta", c.eta}, {"shift", c.shift}});
  jlay["components"] = comps;
  ful::write_json(out_path(st, "layout.json"), jlay);

  ful::CsvWriter csv(out_path(st, "classify.csv"), "r,s,q,tau0,Q,delta_eta,verdict",
                     note_for(st, mp, "classical-classify"));
  for (double tau0 : tau0s) {
    auto res = ful::classify_rational(r, s, tau0, q);
    csv.row(r, s, q, tau0, res.Q, res.delta_eta, ful::to_string(res.verdict));
  }
  return 0;
}

int run_classical_birkhoff(const CliState& st) {
  ful::ModelParams mp = ful::params_from_json(st.cfg);
  const json& cfg = st.cfg;
  double D;
  if (cfg.contains("D") && cfg.at("D").is_string()) {
    auto [r, s] = ful::parse_rational(cfg.at("D").get<std::string>());
    D = static_cast<double>(r) / static_cast<double>(s);
  } else if (cfg.contains("D")) {
    D = cfg.at("D").get<double>();
  } else {
    throw ful::config_error("classical-birkhoff needs D");
  }
  int q = resolve_q(cfg, mp);
  double tau0 = get_or(cfg, "tau0", 0.0);
  long long N = get_or_ll(cfg, "N", 1000000);

  auto rep = ful::birkhoff_diagnostics(D, q, tau0, N);
  ful::write_json(out_path(st, "birkhoff.json"),
                  json{{"D", D},
                       {"q", q},
                       {"tau0", tau0},
                       {"N", rep.steps},
                       {"discrepancy", rep.discrepancy},
                       {"zero_returns", rep.zero_returns},
                       {"final_ratio", rep.final_ratio},
                       {"max_tail_ratio", rep.max_tail_ratio},
                       {"final_sum", rep.final_sum}});
  return 0;
}

int run_quantum_spectrum(const CliState& st) {
  ful::ModelParams mp = ful::params_from_json(st.cfg);
  auto pq = resolve_pq(st.cfg, mp);
  int grid_n = static_cast<int>(get_or_ll(st.cfg, "grid", 1024));
  auto grid = ful::spectrum_grid(grid_n, get_or(st.cfg, "boundary_delta", 1e-9));
  ful::Spectrum spec =
      ful::quasienergy_spectrum(mp, pq.p, static_cast<int>(pq.q), grid, st.threads);

  ful::CsvWriter csv(out_path(st, "spectrum.csv"), "x0,branch,xi,rho",
                     note_for(st, mp, "quantum-spectrum"));
  for (const auto& smp : spec.samples)
    for (int j = 0; j < static_cast<int>(pq.q); ++j) csv.row(smp.x0, j, smp.xi[j], smp.rho[j]);
  return 0;
}

int run_quantum_evolve(const CliState& st) {
  ful::ModelParams mp = ful::params_from_json(st.cfg);
  const json& cfg = st.cfg;
  long long n_periods = get_or_ll(cfg, "n_periods", 200);
  int n_modes = static_cast<int>(get_or_ll(cfg, "n_modes", 4096));
  ful::KickOrder order = ful::KickOrder::as_written;
  if (cfg.contains("ordering")) {
    std::string o = cfg.at("ordering").get<std::string>();
    if (o == "jump-first")
      order = ful::KickOrder::jump_first;
    else if (o != "as-written")
      throw ful::config_error("ordering must be as-written or jump-first");
  }
  ful::PropagatorSetup setup =
      ful::make_setup(mp, static_cast<int>(get_or_ll(cfg, "oversample", 8)));
  int mode = static_cast<int>(get_or_ll(cfg, "mode", 1));

  ful::EnergySeries series =
      ful::evolve_and_fit(ful::Wave::mode(n_modes, mode), setup, n_periods, order);

  ful::CsvWriter csv(out_path(st, "energy.csv"), "N,E", note_for(st, mp, "quantum-evolve"));
  for (std::size_t n = 0; n < series.E.size(); ++n) csv.row(static_cast<long long>(n), series.E[n]);

  json fit{{"a", series.a},       {"b", series.b},
           {"c", series.c},       {"residual_rms", series.residual_rms},
           {"periods", series.periods_done}, {"aborted", series.aborted}};
  auto det = ful::detect_quantum_resonance(mp);
  if (det) {
    auto grid = ful::spectrum_grid(static_cast<int>(get_or_ll(cfg, "coeff_grid", 2048)));
    std::vector<ful::Complex> coeffs(static_cast<std::size_t>(mode), ful::Complex{0.0, 0.0});
    coeffs.back() = ful::Complex{1.0, 0.0};
    auto phi = ful::sample_wave_vector(coeffs, static_cast<int>(det->q), grid);
    double a_analytic = ful::quad_coeff(mp, det->p, static_cast<int>(det->q), phi, st.threads);
    fit["a_analytic"] = a_analytic;
    fit["rel_err"] = std::fabs(series.a - a_analytic) / std::fabs(a_analytic);
  }
  ful::write_json(out_path(st, "fit.json"), fit);

  if (series.aborted)
    throw ful::truncation_error("truncation overflow: energy series aborted early");
  return 0;
}

int run_quantum_coeff(const CliState& st) {
  ful::ModelParams mp = ful::params_from_json(st.cfg);
  auto pq = resolve_pq(st.cfg, mp);
  int grid_n = static_cast<int>(get_or_ll(st.cfg, "grid", 2048));
  auto grid = ful::spectrum_grid(grid_n);
  int mode = static_cast<int>(get_or_ll(st.cfg, "mode", 1));
  std::vector<ful::Complex> coeffs(static_cast<std::size_t>(mode), ful::Complex{0.0, 0.0});
  coeffs.back() = ful::Complex{1.0, 0.0};
  auto phi = ful::sample_wave_vector(coeffs, static_cast<int>(pq.q), grid);
  double a = ful::quad_coeff(mp, pq.p, static_cast<int>(pq.q), phi, st.threads);
  ful::write_json(out_path(st, "coeff.json"),
                  json{{"a_analytic", a}, {"grid_h", 1.0 / grid_n}, {"branches", pq.q}});
  return 0;
}

void apply_tolerance_overrides(ful::VerifyOptions& opt, const json& tol) {
  auto set = [&](const char* key, double& field) {
    if (tol.contains(key)) field = tol.at(key).get<double>();
  };
  set("adiabatic_I", opt.adiabatic_tol_I);
  set("adiabatic_theta", opt.adiabatic_tol_theta);
  set("crossing_tau", opt.crossing_tol_tau);
  set("crossing_I", opt.crossing_tol_I);
  set("circle_D", opt.circle_tol_D);
  set("skew_tau", opt.skew_tol_tau);
  set("cocycle_ratio", opt.cocycle_max_ratio);
  set("unitarity", opt.unitarity_tol);
  set("band_11", opt.band_tol_11);
  set("band_12", opt.band_tol_12);
  set("eigen_residual", opt.eigen_residual_tol);
  set("growth_rel", opt.growth_rel_tol);
  set("growth_residual", opt.growth_residual_tol);
  set("cross_rep", opt.cross_rep_tol);
}

int run_verify(const CliState& st) {
  ful::VerifyOptions opt;
  opt.seed = st.seed;
  const json& cfg = st.cfg;
  if (cfg.contains("quick") && cfg.at("quick").get<bool>()) {
    opt.adiabatic_samples = 100;
    opt.crossing_samples = 50;
    opt.circle_draws = 10;
    opt.circle_steps = 2000;
    opt.escape_periods = 200;
    opt.bounded_periods = 1000;
    opt.cocycle_draws = 5;
    opt.cocycle_steps = 200000;
    opt.cocycle_min_returns = 20;
    opt.unitarity_x_samples = 10;
    opt.band_grid = 256;
    opt.growth_modes_11 = 1024;
    opt.growth_periods_11 = 80;
    opt.growth_modes_12 = 2048;
    opt.growth_periods_12 = 60;
    opt.cross_rep_modes = 1024;
  }
  if (cfg.contains("tolerances")) apply_tolerance_overrides(opt, cfg.at("tolerances"));

  auto gates = ful::run_all_gates(opt);
  bool all_pass = true;
  json jgates = json::array();
  for (const auto& g : gates) {
    all_pass = all_pass && g.pass;
    jgates.push_back(
        {{"name", g.name}, {"pass", g.pass}, {"seconds", g.seconds}, {"details", g.details}});
    std::cout << (g.pass ? "[PASS] " : "[FAIL] ") << g.name << ": " << g.details << "\n";
  }
  std::filesystem::create_directories(st.out_dir);
  ful::write_json((std::filesystem::path(st.out_dir) / "verify.json").string(),
                  json{{"gates", jgates}, {"all_pass", all_pass}, {"seed", st.seed}});
  return all_pass ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"piecewise-linear Fermi-Ulam accelerator laboratory"};
  app.require_subcommand(1);
  app.fallthrough();

  CliState st;
  app.add_option("--config", st.config_path, "scenario JSON file");
  app.add_option("--out", st.out_dir, "output directory");
  app.add_option("--threads", st.threads, "worker threads for batch grids");
  app.add_option("--seed", st.seed, "RNG seed for randomized verification");
  app.add_flag("--timestamp", st.timestamp, "include a timestamp in output headers");

  std::string task;
  auto* classical = app.add_subcommand("classical", "exact bouncer tools");
  classical->require_subcommand(1);
  classical->add_subcommand("simulate", "event-driven trajectory dump")->callback([&] {
    task = "classical-simulate";
  });
  classical->add_subcommand("poincare", "iterate the section normal forms")->callback([&] {
    task = "classical-poincare";
  });
  classical->add_subcommand("classify", "escaping/bounded orbit location")->callback([&] {
    task = "classical-classify";
  });
  classical->add_subcommand("birkhoff", "cocycle recurrence diagnostics")->callback([&] {
    task = "classical-birkhoff";
  });
  auto* quantum = app.add_subcommand("quantum", "Floquet tools");
  quantum->require_subcommand(1);
  quantum->add_subcommand("spectrum", "quasi-energy spectrum dump")->callback([&] {
    task = "quantum-spectrum";
  });
  quantum->add_subcommand("evolve", "direct propagation and quadratic fit")->callback([&] {
    task = "quantum-evolve";
  });
  quantum->add_subcommand("coeff", "analytic quadratic growth coefficient")->callback([&] {
    task = "quantum-coeff";
  });
  app.add_subcommand("verify", "run the cross-module oracle gates")->callback([&] {
    task = "verify";
  });

  CLI11_PARSE(app, argc, argv);

  try {
    if (!st.config_path.empty()) {
      st.cfg = load_config(st.config_path);
      check_task(st.cfg, task);
      if (st.cfg.contains("seed")) st.seed = st.cfg.at("seed").get<std::uint64_t>();
      if (st.cfg.contains("threads")) st.threads = st.cfg.at("threads").get<int>();
    } else if (task != "verify") {
      throw ful::config_error("--config is required");
    }

    if (task == "classical-simulate") return run_classical_simulate(st);
    if (task == "classical-poincare") return run_classical_poincare(st);
    if (task == "classical-classify") return run_classical_classify(st);
    if (task == "classical-birkhoff") return run_classical_birkhoff(st);
    if (task == "quantum-spectrum") return run_quantum_spectrum(st);
    if (task == "quantum-evolve") return run_quantum_evolve(st);
    if (task == "quantum-coeff") return run_quantum_coeff(st);
    if (task == "verify") return run_verify(st);
    throw ful::config_error("unknown task");
  } catch (const ful::config_error& e) {
    std::cerr << "error: code=2 kind=config msg=\"" << e.what() << "\"\n";
    return 2;
  } catch (const ful::grazing_error& e) {
    std::cerr << "error: code=3 kind=grazing msg=\"" << e.what() << "\"\n";
    return 3;
  } catch (const ful::truncation_error& e) {
    std::cerr << "error: code=3 kind=truncation msg=\"" << e.what() << "\"\n";
    return 3;
  } catch (const ful::tracking_error& e) {
    std::cerr << "error: code=3 kind=tracking msg=\"" << e.what() << "\"\n";
    return 3;
  } catch (const ful::error& e) {
    std::cerr << "error: code=3 kind=numeric msg=\"" << e.what() << "\"\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: code=3 kind=internal msg=\"" << e.what() << "\"\n";
    return 3;
  }
}
