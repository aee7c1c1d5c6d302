#include <catch2/catch_amalgamated.hpp>
#include <cmath>

#include "ful/adiabatic.hpp"
#include "ful/classical.hpp"
#include "ful/verify.hpp"
#include "testutil.hpp"

using namespace ful;
using Catch::Approx;

TEST_CASE("adiabatic coordinates, worked values") {
  ModelParams mp(1.0, 2.0, 1.0);
  AdiabaticPoint p = to_adiabatic(0.5, 10.0, mp);
  CHECK(p.theta == Approx(1.0 / 6.0).epsilon(1e-13));
  CHECK(p.I == Approx(6.75).epsilon(1e-13));

  CHECK(to_adiabatic(0.0, 37.0, mp).theta == Approx(0.0).margin(1e-15));
  CHECK(to_adiabatic(mp.T, 5.0, mp).theta == Approx(0.5).epsilon(1e-14));

  // theta equals the quadrature of 1/(2 calT l^2)
  auto g = testutil::rng(31);
  for (int i = 0; i < 20; ++i) {
    ModelParams rp = testutil::random_params(g);
    double t = testutil::uniform(g, 0.0, 2.0 * rp.T);
    auto inv_l2 = [&](double s) { double l = wall_position(rp, s); return 1.0 / (l * l); };
    // integrate piecewise so the kink at t = T stays a panel boundary
    double by_quad = t <= rp.T ? testutil::simpson(inv_l2, 0.0, t)
                               : testutil::simpson(inv_l2, 0.0, rp.T) +
                                     testutil::simpson(inv_l2, rp.T, t);
    by_quad /= 2.0 * rp.calT;
    CHECK(to_adiabatic(t, 10.0, rp).theta == Approx(by_quad).epsilon(1e-9).margin(1e-11));
  }
}

TEST_CASE("from_adiabatic inverts the coordinate change") {
  ModelParams mp(1.0, 2.0, 1.0);
  auto [t, v] = from_adiabatic(AdiabaticPoint{1.0 / 6.0, 6.75}, mp);
  CHECK(t == Approx(0.5).epsilon(1e-12));
  CHECK(v == Approx(10.0).epsilon(1e-12));

  CHECK(from_adiabatic(AdiabaticPoint{0.0, 8.0}, mp).first == Approx(0.0).margin(1e-15));
  CHECK(from_adiabatic(AdiabaticPoint{0.5, 8.0}, mp).first == Approx(mp.T).epsilon(1e-13));

  CHECK_THROWS_AS(from_adiabatic(AdiabaticPoint{1.3, 8.0}, mp), config_error);
  CHECK_THROWS_AS(from_adiabatic(AdiabaticPoint{-0.1, 8.0}, mp), config_error);

  auto g = testutil::rng(32);
  for (int i = 0; i < 300; ++i) {
    ModelParams rp = testutil::random_params(g);
    double t0 = testutil::uniform(g, 0.0, 2.0 * rp.T);
    double v0 = testutil::uniform(g, 20.0 * rp.k, 300.0 * rp.k);
    AdiabaticPoint ap = to_adiabatic(t0, v0, rp);
    auto [t1, v1] = from_adiabatic(ap, rp);
    CHECK(t1 == Approx(t0).epsilon(1e-11).margin(1e-11));
    CHECK(v1 == Approx(v0).epsilon(1e-11));
  }
}

TEST_CASE("free adiabatic step") {
  ModelParams mp(1.0, 2.0, 1.0);
  AdiabaticPoint p{1.0 / 6.0, 6.75};
  AdiabaticPoint next = adiabatic_step(p);
  CHECK(next.theta == Approx(1.0 / 6.0 + 1.0 / 6.75).epsilon(1e-14));
  CHECK(next.I == 6.75);

  // against the exact simulator record f(0.5, 10) = (0.77272..., 12)
  CollisionRecord rec = collision_map_f(0.5, 10.0, mp);
  AdiabaticPoint measured = to_adiabatic(rec.t, rec.v, mp);
  CHECK(measured.theta == Approx(next.theta).epsilon(1e-12));
  CHECK(measured.I == Approx(next.I).epsilon(1e-12));

  AdiabaticPoint big{0.0, 1e6};
  CHECK(adiabatic_step(big).theta == Approx(1e-6).epsilon(1e-12));

  CHECK_THROWS_AS(adiabatic_step(AdiabaticPoint{0.49, 10.0}), singularity_error);
  CHECK_THROWS_AS(adiabatic_step(AdiabaticPoint{0.95, 10.0}), singularity_error);
}

TEST_CASE("normal forms, worked values") {
  ModelParams mp(1.0, 2.0, 1.0);  // 2AkcalT = 1, 2BkcalT = 2
  const double I_min = 5.0;

  NormalPoint a = P1(NormalPoint{0.3, 10.4, Section::R0}, mp, I_min);
  CHECK(a.tau == Approx(0.1).epsilon(1e-12));
  CHECK(a.I == Approx(9.6).epsilon(1e-13));
  CHECK(a.section == Section::RT);

  NormalPoint b = P1(NormalPoint{0.7, 8.0, Section::R0}, mp, I_min);
  CHECK(b.tau == Approx(0.7).epsilon(1e-12));
  CHECK(b.I == Approx(8.4).epsilon(1e-13));

  NormalPoint c = P2(NormalPoint{0.1, 9.6, Section::RT}, mp, I_min);
  CHECK(c.tau == Approx(0.3).epsilon(1e-12));
  CHECK(c.I == Approx(10.4).epsilon(1e-13));
  CHECK(c.section == Section::R0);

  NormalPoint d = P2(NormalPoint{0.7, 8.4, Section::RT}, mp, I_min);
  CHECK(d.tau == Approx(0.5).epsilon(1e-12));
  CHECK(d.I == Approx(8.4).epsilon(1e-13));

  // neutral phase: tau-bar = 1/2 leaves I unchanged (take tau = 1/2 + I/2 mod 1)
  NormalPoint e = P1(NormalPoint{mod1(0.5 + 0.5 * 8.25), 8.25, Section::R0}, mp, I_min);
  CHECK(e.tau == Approx(0.5).epsilon(1e-12));
  CHECK(e.I == Approx(8.25).epsilon(1e-13));

  NormalPoint f = P(NormalPoint{0.3, 10.4, Section::R0}, mp, I_min);
  CHECK(f.tau == Approx(0.3).epsilon(1e-12));
  CHECK(f.I == Approx(10.4).epsilon(1e-13));

  NormalPoint h = P(NormalPoint{0.7, 8.0, Section::R0}, mp, I_min);
  CHECK(h.tau == Approx(0.5).epsilon(1e-12));
  CHECK(h.I == Approx(8.4).epsilon(1e-13));
}

TEST_CASE("normal form preconditions") {
  ModelParams mp(1.0, 2.0, 1.0);
  CHECK_THROWS_AS(P1(NormalPoint{0.3, 10.4, Section::RT}, mp, 5.0), config_error);
  CHECK_THROWS_AS(P2(NormalPoint{0.3, 10.4, Section::R0}, mp, 5.0), config_error);
  CHECK_THROWS_AS(P1(NormalPoint{0.3, 10.4, Section::R0}, mp), threshold_error);
  CHECK(default_I_min(mp) == Approx(20.0));
}

TEST_CASE("Jacobians match the constant matrices and preserve area") {
  auto g = testutil::rng(33);
  for (int trial = 0; trial < 10; ++trial) {
    ModelParams mp = testutil::random_params(g);
    double cA = 2.0 * mp.A * mp.k * mp.calT;
    double cB = 2.0 * mp.B * mp.k * mp.calT;
    double I0 = 40.0 * default_I_min(mp) + testutil::uniform(g, 0.0, 1.0);
    double tau0 = testutil::uniform(g, 0.1, 0.9);
    const double h = 1e-6;

    auto diff2 = [&](auto map, Section sec) {
      NormalPoint pp{tau0 + h, I0, sec}, pm{tau0 - h, I0, sec};
      NormalPoint Ip{tau0, I0 + h, sec}, Im{tau0, I0 - h, sec};
      double j00 = (map(pp).tau - map(pm).tau) / (2.0 * h);
      double j10 = (map(pp).I - map(pm).I) / (2.0 * h);
      double j01 = (map(Ip).tau - map(Im).tau) / (2.0 * h);
      double j11 = (map(Ip).I - map(Im).I) / (2.0 * h);
      return std::array<double, 4>{j00, j01, j10, j11};
    };

    auto p1 = [&](const NormalPoint& p) { return P1(p, mp); };
    auto j = diff2(p1, Section::R0);
    // derivative wraps mod 1; compare up to integer offsets in the tau row
    auto frac_close = [](double a, double b) {
      return std::fabs(a - b - std::round(a - b)) < 1e-6 * (1.0 + std::fabs(b));
    };
    CHECK(frac_close(j[0], 1.0));
    CHECK(frac_close(j[1], -0.5));
    CHECK(j[2] == Approx(2.0 * cA).epsilon(1e-5));
    CHECK(j[3] == Approx(1.0 - cA).epsilon(1e-5));
    CHECK(j[0] * j[3] - j[1] * j[2] == Approx(1.0).epsilon(1e-5));

    auto p2 = [&](const NormalPoint& p) { return P2(p, mp); };
    auto j2 = diff2(p2, Section::RT);
    CHECK(j2[2] == Approx(-2.0 * cB).epsilon(1e-5));
    CHECK(j2[3] == Approx(1.0 + cB).epsilon(1e-5));
    CHECK(j2[0] * j2[3] - j2[1] * j2[2] == Approx(1.0).epsilon(1e-5));
  }
}

TEST_CASE("lemma exactness along simulator segments") {
  auto g = testutil::rng(34);
  int checked = 0;
  while (checked < 50) {
    ModelParams mp = testutil::random_params(g);
    double I0 = testutil::uniform(g, 60.0, 400.0) * default_I_min(mp);
    double theta0 = testutil::uniform(g, 0.0, 1.0);
    double margin = 3.0 / I0;
    if (std::fabs(theta0 - 0.5) < margin || theta0 > 1.0 - margin || theta0 < margin) continue;
    auto [t0, v0] = from_adiabatic(AdiabaticPoint{theta0, I0}, mp);
    CollisionRecord r = collision_map_f(t0, v0, mp);
    AdiabaticPoint a = to_adiabatic(r.t, r.v, mp);
    CHECK(std::fabs(a.I - I0) < 1e-10 * I0);
    CHECK(std::fabs(a.theta - theta0 - 1.0 / I0) < 1e-10);
    ++checked;
  }
}

TEST_CASE("normal forms against the exact simulator oracle") {
  auto g = testutil::rng(35);
  for (int i = 0; i < 50; ++i) {
    ModelParams mp = testutil::random_params(g);
    Section sec = (i % 2 == 0) ? Section::R0 : Section::RT;
    NormalPoint start{testutil::uniform(g, 0.02, 0.98),
                      testutil::uniform(g, 2.0, 20.0) * default_I_min(mp), sec};
    NormalPoint predicted = sec == Section::R0 ? P1(start, mp) : P2(start, mp);
    NormalPoint measured = exact_crossing(start, mp);
    CHECK(mod1_dist(predicted.tau, measured.tau) < 1e-8);
    CHECK(std::fabs(predicted.I - measured.I) < 1e-8 * start.I);
  }
}
