#pragma once

// Adiabatic coordinates (theta, I) for the piecewise-linear bouncer and the
// two Poincare normal forms P1 : R0 -> RT and P2 : RT -> R0 on the
// singularity sections just after the wall kinks. For piecewise-linear wall
// motion these maps are exact, not asymptotic.

#include <cmath>

#include "ful/common.hpp"
#include "ful/model.hpp"

namespace ful {

struct AdiabaticPoint {
  double theta = 0.0;  // adiabatic time, theta(t + 2T) = theta(t) + 1
  double I = 0.0;      // adiabatic momentum calT (l v + l l')
};

enum class Section { R0, RT };

struct NormalPoint {
  double tau = 0.0;  // section time in [0, 1)
  double I = 0.0;
  Section section = Section::R0;
};

// theta(t) = (1/2 calT) int_0^t ds / l(s)^2, evaluated in closed form per
// segment; v follows the section-map convention (speed toward the fixed wall
// immediately after a moving-wall collision).
inline AdiabaticPoint to_adiabatic(double t, double v, const ModelParams& mp) {
  double th = reduce_period(mp, t);
  double l = wall_position(mp, t);
  double theta, ld;
  if (th < mp.T) {
    theta = (1.0 / l - 1.0 / mp.B) / (2.0 * mp.calT * mp.k);
    ld = -mp.k;
  } else {
    theta = 0.5 + (1.0 / mp.A - 1.0 / l) / (2.0 * mp.calT * mp.k);
    ld = mp.k;
  }
  return AdiabaticPoint{theta, mp.calT * (l * v + l * ld)};
}

inline std::pair<double, double> from_adiabatic(const AdiabaticPoint& p, const ModelParams& mp) {
  if (!(p.theta >= 0.0 && p.theta < 1.0))
    throw config_error("theta must lie in [0, 1)");
  double l, t, ld;
  if (p.theta < 0.5) {
    l = 1.0 / (1.0 / mp.B + 2.0 * mp.calT * mp.k * p.theta);
    t = (mp.B - l) / mp.k;
    ld = -mp.k;
  } else {
    l = 1.0 / (1.0 / mp.A - 2.0 * mp.calT * mp.k * (p.theta - 0.5));
    t = mp.T + (l - mp.A) / mp.k;
    ld = mp.k;
  }
  double v = p.I / (mp.calT * l) - ld;
  return {t, v};
}

// Free step between collisions away from the singular strips.
inline AdiabaticPoint adiabatic_step(const AdiabaticPoint& p) {
  double next = p.theta + 1.0 / p.I;
  if ((p.theta < 0.5 && next >= 0.5) || next >= 1.0)
    throw singularity_error("singularity ahead: step crosses a wall kink, use P1/P2");
  return AdiabaticPoint{next, p.I};
}

// Default validity threshold; one normal-form step changes I by at most
// max(2Ak calT, 2Bk calT).
inline double default_I_min(const ModelParams& mp) {
  return 10.0 * std::max(2.0 * mp.A * mp.k * mp.calT, 2.0 * mp.B * mp.k * mp.calT);
}

namespace detail {

inline double section_time_half_step(double tau, double I) {
  double tb = mod1_sub(tau, 0.5 * I);
  if (tb < 1e-13 || tb > 1.0 - 1e-13)
    throw singularity_error("section time at the kink boundary");
  return tb;
}

}  // namespace detail

inline NormalPoint P1(const NormalPoint& p, const ModelParams& mp, double I_min = -1.0) {
  if (p.section != Section::R0) throw config_error("P1 expects a point on R0");
  if (I_min < 0.0) I_min = default_I_min(mp);
  if (p.I < I_min) throw threshold_error("below validity threshold");
  double tb = detail::section_time_half_step(p.tau, p.I);
  double Ib = p.I + 2.0 * mp.A * mp.k * mp.calT * (2.0 * tb - 1.0);
  return NormalPoint{tb, Ib, Section::RT};
}

inline NormalPoint P2(const NormalPoint& p, const ModelParams& mp, double I_min = -1.0) {
  if (p.section != Section::RT) throw config_error("P2 expects a point on RT");
  if (I_min < 0.0) I_min = default_I_min(mp);
  if (p.I < I_min) throw threshold_error("below validity threshold");
  double tb = detail::section_time_half_step(p.tau, p.I);
  double Ib = p.I - 2.0 * mp.B * mp.k * mp.calT * (2.0 * tb - 1.0);
  return NormalPoint{tb, Ib, Section::R0};
}

// Complete Poincare map P = P2 . P1 on R0.
inline NormalPoint P(const NormalPoint& p, const ModelParams& mp, double I_min = -1.0) {
  return P2(P1(p, mp, I_min), mp, I_min);
}

}  // namespace ful
