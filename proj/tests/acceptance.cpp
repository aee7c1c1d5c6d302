// Acceptance suite: runs every cross-module gate at full scale and prints one
// pass/fail line per criterion. Exits nonzero if any criterion fails.

#include <cmath>
#include <cstdio>
#include <string>

#include "ful/verify.hpp"

namespace {

int failures = 0;

void report(int number, const std::string& label, const ful::GateResult& g,
            bool extra_ok = true, const std::string& extra = "") {
  bool pass = g.pass && extra_ok;
  if (!pass) ++failures;
  std::printf("[%s] criterion %2d %-22s (%.1fs) %s%s\n", pass ? "PASS" : "FAIL", number,
              label.c_str(), g.seconds, g.details.c_str(), extra.c_str());
}

}  // namespace

int main() {
  ful::VerifyOptions opt;  // defaults are the full acceptance scale

  {
    auto g = ful::gate_adiabatic_exactness(opt);
    report(1, "adiabatic exactness", g, g.seconds < 10.0,
           g.seconds < 10.0 ? "" : " [over 10s budget]");
  }
  {
    auto g = ful::gate_normal_form_oracle(opt);
    report(2, "normal-form oracle", g, g.seconds < 30.0,
           g.seconds < 30.0 ? "" : " [over 30s budget]");
  }
  report(3, "circle invariance", ful::gate_circle_invariance(opt));
  report(4, "skew equivalence", ful::gate_skew_equivalence(opt));
  report(5, "Ulam escape", ful::gate_ulam_escape(opt));
  report(6, "zero-mean recurrence", ful::gate_zero_mean_recurrence(opt));
  report(7, "Floquet unitarity", ful::gate_floquet_unitarity(opt));
  report(8, "quasi-energy bands", ful::gate_quasienergy_bands(opt));
  {
    // criterion 9 also pins reference constants for the analytic coefficient;
    // the (1,2) value printed in the acceptance text is inconsistent with the
    // quadratic-form definition of the coefficient (it omits the 2 J1 J2
    // cross term), so that sub-check fails and is reported as such.
    auto g = ful::gate_quadratic_growth(opt);
    auto grid = ful::spectrum_grid(2048);
    auto mp11 = ful::ModelParams::quantum_resonant(1.0, 2.0, 1, 1);
    auto mp12 = ful::ModelParams::quantum_resonant(1.0, 3.0, 1, 2);
    double a11 = ful::quad_coeff(mp11, 1, 1,
                                 ful::sample_wave_vector({ful::Complex{1.0, 0.0}}, 1, grid));
    double a12 = ful::quad_coeff(mp12, 1, 2,
                                 ful::sample_wave_vector({ful::Complex{1.0, 0.0}}, 2, grid));
    bool ref11 = std::fabs(a11 - 0.087185) / 0.087185 < 0.05;
    bool ref12 = std::fabs(a12 - 2.4799) / 2.4799 < 0.05;
    char buf[256];
    std::snprintf(buf, sizeof(buf),
                  " | reference constants: (1,1) %.6f vs 0.087185 %s; (1,2) %.6f vs 2.4799 %s%s",
                  a11, ref11 ? "ok" : "FAIL", a12, ref12 ? "ok" : "FAIL",
                  ref12 ? "" : " (stated value omits the 2*J1*J2 cross term of the "
                               "quadratic form; fitted and analytic agree on the full form)");
    bool budget = g.seconds < 300.0;
    report(9, "quadratic growth", g, ref11 && ref12 && budget, buf);
  }
  report(10, "cross-representation", ful::gate_cross_representation(opt));

  std::printf("%d criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
