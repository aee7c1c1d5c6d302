#include <catch2/catch_amalgamated.hpp>
#include <json.hpp>
#include <numbers>

#include "ful/io.hpp"
#include "ful/model.hpp"
#include "testutil.hpp"

using namespace ful;
using Catch::Approx;

TEST_CASE("derived constants and invariants") {
  ModelParams mp(1.0, 2.0, 1.0);
  CHECK(mp.k == Approx(1.0));
  CHECK(mp.calT == Approx(0.5));
  CHECK(mp.J1 == Approx(-1.0));
  CHECK(mp.J2 == Approx(-0.5));

  auto g = testutil::rng(11);
  for (int i = 0; i < 100; ++i) {
    ModelParams p = testutil::random_params(g);
    CHECK(p.J1 < 0.0);
    CHECK(p.J2 < 0.0);
    CHECK(p.J1 == Approx((p.B / p.A) * p.J2).epsilon(1e-14));
    CHECK(p.calT == Approx(p.T / (p.A * p.B)).epsilon(1e-14));
  }
}

TEST_CASE("parameter validation") {
  CHECK_THROWS_AS(ModelParams(1.0, 0.5, 1.0), config_error);
  CHECK_THROWS_AS(ModelParams(1.0, 1.0, 1.0), config_error);
  CHECK_THROWS_AS(ModelParams(-1.0, 2.0, 1.0), config_error);
  CHECK_THROWS_AS(ModelParams(1.0, 2.0, 0.0), config_error);
}

TEST_CASE("wall position") {
  ModelParams mp(1.0, 2.0, 1.0);
  CHECK(wall_position(mp, 0.0) == Approx(2.0));
  CHECK(wall_position(mp, 1.0) == Approx(1.0));
  CHECK(wall_position(mp, 2.5) == Approx(1.5));

  auto g = testutil::rng(12);
  for (int i = 0; i < 100; ++i) {
    ModelParams p = testutil::random_params(g);
    double eps = 1e-8;
    CHECK(std::fabs(wall_position(p, p.T - eps) - wall_position(p, p.T + eps)) < 3.0 * p.k * eps);
    double t = testutil::uniform(g, 0.0, 10.0 * p.T);
    CHECK(wall_position(p, t + 2.0 * p.T) ==
          Approx(wall_position(p, t)).epsilon(1e-12).margin(1e-12 * p.B));
    double l = wall_position(p, t);
    CHECK(l >= p.A - 1e-12);
    CHECK(l <= p.B + 1e-12);
  }
}

TEST_CASE("wall velocity one-sided limits") {
  ModelParams mp(1.0, 2.0, 1.0);
  CHECK(wall_velocity(mp, 0.5, Side::left) == Approx(-1.0));
  CHECK(wall_velocity(mp, 0.5, Side::right) == Approx(-1.0));
  CHECK(wall_velocity(mp, 1.0, Side::right) == Approx(1.0));
  CHECK(wall_velocity(mp, 1.0, Side::left) == Approx(-1.0));
  CHECK(wall_velocity(mp, 2.0, Side::right) == Approx(-1.0));
  CHECK(wall_velocity(mp, 2.0, Side::left) == Approx(1.0));
}

TEST_CASE("classical resonance detection") {
  ModelParams ulam(1.0 / std::numbers::sqrt2, std::numbers::sqrt2, 1.0);
  auto r = detect_classical_resonance(ulam);
  REQUIRE(r.has_value());
  CHECK(r->q == 1);

  auto r2 = detect_classical_resonance(ModelParams(1.0, 3.0, 1.0));
  REQUIRE(r2.has_value());
  CHECK(r2->q == 2);

  CHECK_FALSE(detect_classical_resonance(ModelParams(1.0, 2.5, 1.0), 100, 1e-9).has_value());
}

TEST_CASE("quantum resonant construction") {
  auto mp = ModelParams::quantum_resonant(1.0, 2.0, 1, 1);
  CHECK(mp.T == Approx(4.0 / std::numbers::pi).epsilon(1e-15));
  CHECK(mp.J1 == Approx(-std::numbers::pi / 4.0).epsilon(1e-14));
  CHECK(mp.J2 == Approx(-std::numbers::pi / 8.0).epsilon(1e-14));
  CHECK(mp.calT == Approx(2.0 / std::numbers::pi).epsilon(1e-14));

  auto mp2 = ModelParams::quantum_resonant(1.0, 3.0, 1, 2);
  CHECK(mp2.T == Approx(3.0 / std::numbers::pi).epsilon(1e-15));
  CHECK(mp2.J1 == Approx(-std::numbers::pi).epsilon(1e-14));
  CHECK(mp2.J2 == Approx(-std::numbers::pi / 3.0).epsilon(1e-14));

  auto mp3 = ModelParams::quantum_resonant(1.0, 2.0, 2, 1);
  CHECK(mp3.T == Approx(8.0 / std::numbers::pi).epsilon(1e-15));

  CHECK_THROWS_AS(ModelParams::quantum_resonant(2.0, 1.0, 1, 1), config_error);
  CHECK_THROWS_AS(ModelParams::quantum_resonant(1.0, 2.0, 2, 4), config_error);

  auto g = testutil::rng(13);
  for (int i = 0; i < 100; ++i) {
    double A = testutil::uniform(g, 0.5, 2.0);
    double B = A * testutil::uniform(g, 1.2, 4.0);
    long long p = 1 + static_cast<long long>(testutil::uniform(g, 0.0, 5.0));
    long long q = 1 + static_cast<long long>(testutil::uniform(g, 0.0, 5.0));
    long long d = std::gcd(p, q);
    p /= d;
    q /= d;
    auto m = ModelParams::quantum_resonant(A, B, p, q);
    double ratio = 0.5 * std::numbers::pi * m.T / (A * B);
    CHECK(std::fabs(ratio - static_cast<double>(p) / q) < 1e-14);
  }
}

TEST_CASE("quantum resonance detection from floats") {
  auto built = ModelParams::quantum_resonant(1.0, 2.0, 1, 1);
  ModelParams raw(1.0, 2.0, built.T);  // loses the stored resonance
  auto det = detect_quantum_resonance(raw);
  REQUIRE(det.has_value());
  CHECK(det->p == 1);
  CHECK(det->q == 1);

  auto built2 = ModelParams::quantum_resonant(1.0, 3.0, 3, 5);
  auto det2 = detect_quantum_resonance(ModelParams(1.0, 3.0, built2.T));
  REQUIRE(det2.has_value());
  CHECK(det2->p == 3);
  CHECK(det2->q == 5);

  CHECK_FALSE(detect_quantum_resonance(ModelParams(1.0, 2.0, 1.0)).has_value());
}

TEST_CASE("params JSON round trip recomputes derived fields") {
  ModelParams mp(0.7, 1.9, 1.3);
  auto j = params_to_json(mp);
  ModelParams back = params_from_json(j);
  CHECK(back.A == mp.A);
  CHECK(back.B == mp.B);
  CHECK(back.T == mp.T);
  CHECK(back.k == Approx(mp.k).epsilon(1e-15));
  CHECK(back.J1 == Approx(mp.J1).epsilon(1e-15));

  nlohmann::json ctor = {{"A", 1.0}, {"B", 2.0}, {"p", 1}, {"q", 1}};
  ModelParams res = params_from_json(ctor);
  REQUIRE(res.quantum.has_value());
  CHECK(res.T == Approx(4.0 / std::numbers::pi));

  nlohmann::json bad = {{"A", 2.0}, {"B", 1.0}, {"T", 1.0}};
  CHECK_THROWS_AS(params_from_json(bad), config_error);
  nlohmann::json both = {{"A", 1.0}, {"B", 2.0}, {"T", 1.0}, {"p", 1}, {"q", 1}};
  CHECK_THROWS_AS(params_from_json(both), config_error);
}
