#pragma once

// Shared error types and numeric helpers used across the library.

#include <cmath>
#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <string>
#include <utility>

namespace ful {

inline constexpr const char* kVersion = "0.1.0";

struct error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Invalid parameters, malformed configuration, violated preconditions.
struct config_error : error {
  using error::error;
};

// Relative approach speed at contact below the grazing threshold.
struct grazing_error : error {
  using error::error;
};

// Moving wall catches the particle before the fixed-wall bounce.
struct recollision_error : error {
  using error::error;
};

// Adiabatic momentum below the normal-form validity threshold.
struct threshold_error : error {
  using error::error;
};

// A free adiabatic step would cross a wall kink; switch to P1/P2.
struct singularity_error : error {
  using error::error;
};

// Base point of an interval exchange map sits on a cut.
struct cut_point_error : error {
  using error::error;
};

// Folded coordinate lands on the +-1 boundary.
struct boundary_fold_error : error {
  using error::error;
};

// Eigenvalue branch matching between adjacent grid points failed.
struct tracking_error : error {
  using error::error;
};

// Truncated-basis step lost more mass than the allowed budget.
struct truncation_error : error {
  using error::error;
};

struct not_unitary_error : error {
  using error::error;
};

struct no_event_error : error {
  using error::error;
};

// Knuth two-sum: s + e == a + b exactly.
inline std::pair<double, double> two_sum(double a, double b) {
  double s = a + b;
  double bb = s - a;
  double e = (a - (s - bb)) + (b - bb);
  return {s, e};
}

// Reduce into [0, 1).
inline double mod1(double x) {
  double r = x - std::floor(x);
  if (r >= 1.0) r -= 1.0;
  if (r < 0.0) r += 1.0;
  return r;
}

// frac(a - b) with the subtraction carried out exactly via two-sum, so the
// result keeps O(eps) absolute accuracy even when |b| >> 1.
inline double mod1_sub(double a, double b) {
  auto [s, e] = two_sum(a, -b);
  double r = s - std::floor(s);  // exact for |s| < 2^52
  r += e;
  r -= std::floor(r);
  if (r >= 1.0) r -= 1.0;
  if (r < 0.0) r += 1.0;
  return r;
}

// Distance on the circle R/Z.
inline double mod1_dist(double a, double b) {
  double d = std::fabs(mod1(a) - mod1(b));
  return d <= 0.5 ? d : 1.0 - d;
}

// Compact double-double arithmetic (Dekker/Bailey style). Long iterations of
// the parabolic section maps shear per-step rounding along the invariant
// circles, so verification harnesses carry their state at this precision.
struct DD {
  double hi = 0.0;
  double lo = 0.0;
};

inline DD dd_renorm(double a, double b) {
  double s = a + b;
  double e = b - (s - a);
  return {s, e};
}

inline DD dd_from(double a) { return {a, 0.0}; }

inline DD dd_add(const DD& a, const DD& b) {
  auto [s1, s2] = two_sum(a.hi, b.hi);
  return dd_renorm(s1, s2 + a.lo + b.lo);
}

inline DD dd_neg(const DD& a) { return {-a.hi, -a.lo}; }

inline DD dd_sub(const DD& a, const DD& b) { return dd_add(a, dd_neg(b)); }

inline DD dd_mul(const DD& a, const DD& b) {
  double p = a.hi * b.hi;
  double e = std::fma(a.hi, b.hi, -p);
  return dd_renorm(p, e + a.hi * b.lo + a.lo * b.hi);
}

inline DD dd_scale(const DD& a, double s) {  // exact for powers of two
  return {a.hi * s, a.lo * s};
}

// 2q/(q+1) with the division residual captured.
inline DD dd_ratio(double num, double den) {
  double hi = num / den;
  double p = hi * den;
  double e = std::fma(hi, den, -p);
  return dd_renorm(hi, (num - p - e) / den);
}

// Reduce into [0, 1).
inline DD dd_mod1(const DD& a) {
  double f = a.hi - std::floor(a.hi);  // exact for |hi| < 2^52
  DD r = dd_renorm(f, a.lo);
  if (r.hi >= 1.0) r = dd_add(r, dd_from(-1.0));
  if (r.hi < 0.0) r = dd_add(r, dd_from(1.0));
  return r;
}

struct KahanSum {
  double s = 0.0;
  double c = 0.0;
  explicit KahanSum(double init = 0.0) : s(init) {}
  void add(double x) {
    double y = x - c;
    double t = s + y;
    c = (t - s) - y;
    s = t;
  }
  double value() const { return s; }
};

// Parse "r/s" into a reduced nonnegative rational with s > 0.
inline std::pair<long long, long long> parse_rational(const std::string& text) {
  auto slash = text.find('/');
  if (slash == std::string::npos)
    throw config_error("rational must be written as \"r/s\", got: " + text);
  long long r = 0, s = 0;
  try {
    std::size_t pos_r = 0, pos_s = 0;
    r = std::stoll(text.substr(0, slash), &pos_r);
    s = std::stoll(text.substr(slash + 1), &pos_s);
    if (pos_r != slash || pos_s != text.size() - slash - 1)
      throw config_error("trailing characters in rational: " + text);
  } catch (const config_error&) {
    throw;
  } catch (const std::exception&) {
    throw config_error("cannot parse rational: " + text);
  }
  if (s <= 0) throw config_error("rational denominator must be positive: " + text);
  if (r < 0) throw config_error("rational numerator must be nonnegative: " + text);
  long long g = std::gcd(r, s);
  if (g > 1) {
    r /= g;
    s /= g;
  }
  return {r, s};
}

}  // namespace ful
