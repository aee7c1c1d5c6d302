#pragma once

// Piecewise-linear wall motion model: geometry parameters, derived kick
// constants, and classical/quantum resonance detection.

#include <cmath>
#include <numbers>
#include <numeric>
#include <optional>
#include <string>

#include "ful/common.hpp"

namespace ful {

struct ClassicalResonance {
  int q = 1;  // (B - A) / A
};

struct QuantumResonance {
  long long p = 1;
  long long q = 1;  // (pi/2) T/(A B) = p/q, gcd(p, q) = 1
};

// Wall oscillates between B (at t = 0) and A (at t = T), period 2T.
// All derived fields are recomputed from (A, B, T); never set them directly.
struct ModelParams {
  double A = 0.0;
  double B = 0.0;
  double T = 0.0;
  double k = 0.0;     // slope (B - A) / T
  double calT = 0.0;  // reduced half-period T / (A B)
  double J1 = 0.0;    // kick strength B (A - B) / (2T), negative
  double J2 = 0.0;    // kick strength A (A - B) / (2T), negative
  std::optional<QuantumResonance> quantum;  // set by quantum_resonant()

  ModelParams() = default;

  ModelParams(double A_, double B_, double T_) : A(A_), B(B_), T(T_) {
    if (!(A > 0.0)) throw config_error("A must be positive");
    if (!(B > A)) throw config_error("B must exceed A");
    if (!(T > 0.0)) throw config_error("T must be positive");
    if (!std::isfinite(A) || !std::isfinite(B) || !std::isfinite(T))
      throw config_error("parameters must be finite");
    k = (B - A) / T;
    calT = T / (A * B);
    J1 = B * (A - B) / (2.0 * T);
    J2 = A * (A - B) / (2.0 * T);
  }

  // T chosen so that (pi/2) T/(A B) = p/q exactly up to rounding.
  static ModelParams quantum_resonant(double A_, double B_, long long p, long long q) {
    if (p <= 0 || q <= 0) throw config_error("resonance orders must be positive");
    if (std::gcd(p, q) != 1) throw config_error("resonance orders must be coprime");
    if (!(B_ > A_)) throw config_error("B must exceed A");
    double T_ = 2.0 * A_ * B_ * static_cast<double>(p) /
                (std::numbers::pi * static_cast<double>(q));
    ModelParams mp(A_, B_, T_);
    mp.quantum = QuantumResonance{p, q};
    return mp;
  }
};

inline double reduce_period(const ModelParams& mp, double t) {
  double th = std::fmod(t, 2.0 * mp.T);
  if (th < 0.0) th += 2.0 * mp.T;
  return th;
}

// l(t): B - k t on [0, T), A + k (t - T) on [T, 2T), extended 2T-periodically.
inline double wall_position(const ModelParams& mp, double t) {
  double th = reduce_period(mp, t);
  return th < mp.T ? mp.B - mp.k * th : mp.A + mp.k * (th - mp.T);
}

enum class Side { left, right };

// Wall velocity; at the kinks t = 0, T (mod 2T) returns the requested
// one-sided limit. Times within 1e-12 T of a kink snap to it.
inline double wall_velocity(const ModelParams& mp, double t, Side side = Side::right) {
  double th = reduce_period(mp, t);
  double tol = 1e-12 * mp.T;
  if (th < tol || th > 2.0 * mp.T - tol)
    return side == Side::right ? -mp.k : mp.k;
  if (std::fabs(th - mp.T) < tol)
    return side == Side::right ? mp.k : -mp.k;
  return th < mp.T ? -mp.k : mp.k;
}

inline std::optional<ClassicalResonance> detect_classical_resonance(
    const ModelParams& mp, int max_q = 64, double tol = 1e-9) {
  if (max_q < 1 || !(tol > 0.0)) throw config_error("invalid resonance search bounds");
  double ratio = (mp.B - mp.A) / mp.A;
  double nearest = std::round(ratio);
  if (nearest >= 1.0 && nearest <= static_cast<double>(max_q) &&
      std::fabs(ratio - nearest) < tol)
    return ClassicalResonance{static_cast<int>(nearest)};
  return std::nullopt;
}

// Continued-fraction convergents of (pi/2) T/(A B) with denominator <= max_den.
inline std::optional<QuantumResonance> detect_quantum_resonance(
    const ModelParams& mp, long long max_den = 64, double tol = 1e-12) {
  if (mp.quantum) return mp.quantum;
  double target = 0.5 * std::numbers::pi * mp.calT;
  double x = target;
  long long p_prev = 1, q_prev = 0;
  long long p_cur = static_cast<long long>(std::floor(x)), q_cur = 1;
  for (int it = 0; it < 64; ++it) {
    if (q_cur <= max_den && p_cur >= 1) {
      double approx = static_cast<double>(p_cur) / static_cast<double>(q_cur);
      if (std::fabs(target - approx) < tol)
        return QuantumResonance{p_cur, q_cur};
    }
    double frac = x - std::floor(x);
    if (frac < 1e-15 || q_cur > max_den) break;
    x = 1.0 / frac;
    long long a = static_cast<long long>(std::floor(x));
    long long p_next = a * p_cur + p_prev;
    long long q_next = a * q_cur + q_prev;
    p_prev = p_cur;
    q_prev = q_cur;
    p_cur = p_next;
    q_cur = q_next;
  }
  return std::nullopt;
}

}  // namespace ful
