#pragma once

// Event-driven simulation of a point particle bouncing elastically between
// the fixed wall at x = 0 and the piecewise-linearly moving wall at x = l(t).
// Events are solved in closed form segment by segment, so the evolution is
// exact up to floating-point rounding at every energy, including the
// re-collision regime.

#include <cmath>
#include <vector>

#include "ful/adiabatic.hpp"
#include "ful/common.hpp"
#include "ful/model.hpp"

namespace ful {

// Lab-frame state between events; v > 0 means moving away from the fixed wall.
struct ParticleState {
  double x = 0.0;
  double v = 0.0;
  double t = 0.0;
};

// Moving-wall collision event. v is the speed immediately after the collision
// measured toward the fixed wall (the sign convention of the section map f).
struct CollisionRecord {
  double t = 0.0;
  double v = 0.0;
  bool singular = false;  // collision at a wall kink (within 1e-12 T)
};

enum class EventKind { fixed_wall, moving_wall };

struct Event {
  EventKind kind = EventKind::fixed_wall;
  double t = 0.0;
  bool singular = false;
};

namespace detail {

inline bool near_kink(const ModelParams& mp, double t) {
  double r = t / mp.T;
  return std::fabs(r - std::round(r)) < 1e-12;
}

}  // namespace detail

// Earliest strictly-future event. Scans wall segments from the current time;
// a particle below x = A is out of the moving wall's reach, which gives the
// two fast paths that bound the scan to a handful of windows.
inline Event next_event(const ParticleState& s, const ModelParams& mp) {
  const double k = mp.k;
  const double T = mp.T;
  const double eps_g = 1e-10 * k;
  const double kink_tol = 1e-12 * T;

  const double reach_margin = 1e-13 * (mp.A + mp.B);
  bool fast_forwarded = false;
  double t_lo = s.t;
  for (int window = 0; window < 1024; ++window) {
    double x_lo = s.x + s.v * (t_lo - s.t);

    if (s.v < 0.0 && x_lo <= mp.A) {
      if (-s.v < eps_g) throw grazing_error("grazing: particle nearly at rest at the fixed wall");
      double tf = t_lo + x_lo / (-s.v);
      return Event{EventKind::fixed_wall, tf, detail::near_kink(mp, tf)};
    }
    if (s.v >= 0.0 && x_lo < mp.A - reach_margin) {
      if (s.v == 0.0)
        throw no_event_error("no event: particle at rest below the wall's turning distance");
      if (!fast_forwarded) {
        t_lo += (mp.A + reach_margin - x_lo) / s.v;  // wall cannot reach below A
        fast_forwarded = true;
        continue;
      }
    }

    double fl = std::floor(t_lo / T);
    if (t_lo / T - fl > 1.0 - 1e-12) fl += 1.0;
    double t_hi = (fl + 1.0) * T;
    bool descending = std::fmod(fl, 2.0) == 0.0;
    double ld = descending ? -k : k;
    double l_lo = wall_position(mp, t_lo);

    double best = -1.0;
    EventKind best_kind = EventKind::fixed_wall;

    if (s.v < 0.0) {
      double tf = s.t - s.x / s.v;
      if (tf > s.t && tf >= t_lo - kink_tol && tf <= t_hi + kink_tol) {
        if (-s.v < eps_g) throw grazing_error("grazing: approach speed below threshold at the fixed wall");
        best = tf;
        best_kind = EventKind::fixed_wall;
      }
    }

    double rel = s.v - ld;  // approach speed toward the moving wall
    if (rel > 0.0) {
      double gap = l_lo - x_lo;  // >= 0 inside the billiard
      double tm = t_lo + (gap > 0.0 ? gap / rel : 0.0);
      if (tm > s.t && tm <= t_hi + kink_tol) {
        if (rel < eps_g) throw grazing_error("grazing: approach speed below threshold at the moving wall");
        if (best < 0.0 || tm < best) {
          best = tm;
          best_kind = EventKind::moving_wall;
        }
      }
    }

    if (best >= 0.0) return Event{best_kind, best, detail::near_kink(mp, best)};
    t_lo = t_hi;
  }
  throw error("event search exceeded the window cap");
}

// Elastic reflection at the event. Kink collisions use the wall velocity of
// the left segment, matching the singularity-section convention.
inline ParticleState reflect(const ParticleState& s, const Event& ev, const ModelParams& mp) {
  double v_in = s.v;
  if (ev.kind == EventKind::fixed_wall) return ParticleState{0.0, -v_in, ev.t};
  double ld = wall_velocity(mp, ev.t, ev.singular ? Side::left : Side::right);
  return ParticleState{wall_position(mp, ev.t), 2.0 * ld - v_in, ev.t};
}

struct StopRule {
  enum class Kind { n_collisions, t_max, I_ceiling, I_floor };
  Kind kind = Kind::n_collisions;
  double value = 0.0;

  static StopRule n_collisions(long long n) { return {Kind::n_collisions, static_cast<double>(n)}; }
  static StopRule t_max(double t) { return {Kind::t_max, t}; }
  static StopRule I_ceiling(double I) { return {Kind::I_ceiling, I}; }
  static StopRule I_floor(double I) { return {Kind::I_floor, I}; }
};

// Ordered moving-wall collision records starting from `initial`.
inline std::vector<CollisionRecord> simulate(const CollisionRecord& initial,
                                             const ModelParams& mp, const StopRule& stop) {
  std::vector<CollisionRecord> out{initial};
  if (stop.kind == StopRule::Kind::n_collisions && stop.value <= 0) return out;

  ParticleState st{wall_position(mp, initial.t), -initial.v, initial.t};
  long long n_moving = 0;
  while (true) {
    Event ev = next_event(st, mp);
    if (stop.kind == StopRule::Kind::t_max && ev.t > stop.value) break;
    double v_in = st.v;
    st = reflect(st, ev, mp);
    if (ev.kind != EventKind::moving_wall) continue;

    double ld = wall_velocity(mp, ev.t, ev.singular ? Side::left : Side::right);
    CollisionRecord rec{ev.t, v_in - 2.0 * ld, ev.singular};
    out.push_back(rec);
    ++n_moving;

    if (stop.kind == StopRule::Kind::n_collisions && n_moving >= static_cast<long long>(stop.value)) break;
    if (stop.kind == StopRule::Kind::I_ceiling || stop.kind == StopRule::Kind::I_floor) {
      double I = to_adiabatic(rec.t, rec.v, mp).I;
      if (stop.kind == StopRule::Kind::I_ceiling && I >= stop.value) break;
      if (stop.kind == StopRule::Kind::I_floor && I <= stop.value) break;
    }
  }
  return out;
}

// High-energy collision map f: (t0, v0) -> (t1, v1). Requires that the
// particle reaches the fixed wall before the moving wall catches it;
// otherwise the orbit has left the regime where f is defined.
inline CollisionRecord collision_map_f(double t0, double v0, const ModelParams& mp) {
  ParticleState st{wall_position(mp, t0), -v0, t0};
  Event ev = next_event(st, mp);
  if (ev.kind != EventKind::fixed_wall)
    throw recollision_error("re-collision: moving wall caught the particle before the fixed-wall bounce");
  st = reflect(st, ev, mp);
  Event ev2 = next_event(st, mp);
  if (ev2.kind != EventKind::moving_wall)
    throw error("expected a moving-wall event after the fixed-wall bounce");
  double ld = wall_velocity(mp, ev2.t, ev2.singular ? Side::left : Side::right);
  double v_in = st.v;
  return CollisionRecord{ev2.t, v_in - 2.0 * ld, ev2.singular};
}

}  // namespace ful
