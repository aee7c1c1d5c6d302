#pragma once

// Direct time evolution of the stopped-wall equation in a truncated sine
// basis: free flight is diagonal, the x^2 kicks act in position space on an
// oversampled grid. Serves as the independent oracle for the resonant
// Floquet matrices.

#include <fftw3.h>

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <limits>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <optional>
#include <vector>

#include "ful/common.hpp"
#include "ful/floquet.hpp"
#include "ful/model.hpp"

namespace ful {

namespace detail {

// FFTW DST-I (RODFT00) plans, cached per size and per thread. Planning is
// serialized globally; execution uses the instance buffers.
class Dst {
 public:
  explicit Dst(int m) : m_(m) {
    in_ = fftw_alloc_real(m);
    out_ = fftw_alloc_real(m);
    static std::mutex planner_mutex;
    std::lock_guard<std::mutex> lock(planner_mutex);
    plan_ = fftw_plan_r2r_1d(m, in_, out_, FFTW_RODFT00, FFTW_ESTIMATE);
    if (!plan_) throw error("FFTW plan creation failed");
  }
  ~Dst() {
    fftw_destroy_plan(plan_);
    fftw_free(in_);
    fftw_free(out_);
  }
  Dst(const Dst&) = delete;
  Dst& operator=(const Dst&) = delete;

  // y_k = 2 sum_j x_j sin(pi (j+1)(k+1)/(m+1))
  void run(const double* x, double* y) {
    for (int i = 0; i < m_; ++i) in_[i] = x[i];
    fftw_execute(plan_);
    for (int i = 0; i < m_; ++i) y[i] = out_[i];
  }

  static Dst& of_size(int m) {
    thread_local std::map<int, std::unique_ptr<Dst>> cache;
    auto& slot = cache[m];
    if (!slot) slot = std::make_unique<Dst>(m);
    return *slot;
  }

 private:
  int m_;
  double* in_;
  double* out_;
  fftw_plan plan_;
};

}  // namespace detail

// Truncated wave in the orthonormal basis sqrt(2) sin(n pi x), n = 1..N.
struct Wave {
  std::vector<Complex> c;

  int n_modes() const { return static_cast<int>(c.size()); }
  double norm2() const {
    double s = 0.0;
    for (const auto& z : c) s += std::norm(z);
    return s;
  }
  static Wave mode(int n_modes, int n) {
    if (n < 1 || n > n_modes) throw config_error("initial mode out of range");
    Wave w;
    w.c.assign(n_modes, Complex{0.0, 0.0});
    w.c[static_cast<std::size_t>(n - 1)] = Complex{1.0, 0.0};
    return w;
  }
};

// Coefficients from samples f_i = f(i/(M+1)), i = 1..M.
inline Wave sine_analysis(const std::vector<Complex>& grid_values) {
  const int m = static_cast<int>(grid_values.size());
  if (m < 1) throw config_error("analysis needs at least one sample");
  std::vector<double> re(m), im(m), yre(m), yim(m);
  for (int i = 0; i < m; ++i) {
    re[i] = grid_values[i].real();
    im[i] = grid_values[i].imag();
  }
  auto& dst = detail::Dst::of_size(m);
  dst.run(re.data(), yre.data());
  dst.run(im.data(), yim.data());
  Wave w;
  w.c.resize(m);
  const double scale = 1.0 / (std::numbers::sqrt2 * (m + 1));
  for (int i = 0; i < m; ++i) w.c[i] = Complex{yre[i], yim[i]} * scale;
  return w;
}

// Samples on the grid i/(M+1), i = 1..M, with M >= n_modes.
inline std::vector<Complex> sine_synthesis(const Wave& w, int m) {
  if (m < w.n_modes()) throw config_error("synthesis grid must hold all modes");
  std::vector<double> re(m, 0.0), im(m, 0.0), yre(m), yim(m);
  for (int i = 0; i < w.n_modes(); ++i) {
    re[i] = w.c[i].real();
    im[i] = w.c[i].imag();
  }
  auto& dst = detail::Dst::of_size(m);
  dst.run(re.data(), yre.data());
  dst.run(im.data(), yim.data());
  std::vector<Complex> out(m);
  const double scale = 1.0 / std::numbers::sqrt2;
  for (int i = 0; i < m; ++i) out[i] = Complex{yre[i], yim[i]} * scale;
  return out;
}

struct PropagatorSetup {
  double calT = 0.0;
  double J1 = 0.0;
  double J2 = 0.0;
  std::optional<QuantumResonance> resonance;
  int oversample = 8;
};

inline PropagatorSetup make_setup(const ModelParams& mp, int oversample = 8) {
  PropagatorSetup s;
  s.calT = mp.calT;
  s.J1 = mp.J1;
  s.J2 = mp.J2;
  s.resonance = detect_quantum_resonance(mp);
  s.oversample = oversample;
  return s;
}

// Free-flight phases exp(-i (n pi)^2 calT), n = 1..N. Under (p,q)-resonance
// the phase reduces to -2 pi n^2 p / q, evaluated with exact integer
// arithmetic mod q; otherwise the reduction mod 2 pi is done in double-double
// to keep large-n phases accurate.
inline std::vector<Complex> free_phases(const PropagatorSetup& s, int n_modes) {
  std::vector<Complex> ph(n_modes);
  const double twopi = 2.0 * std::numbers::pi;
  if (s.resonance) {
    long long p = s.resonance->p, q = s.resonance->q;
    for (int i = 0; i < n_modes; ++i) {
      long long n = i + 1;
      long long r = (n % q) * (n % q) % q * (p % q) % q;
      ph[i] = detail::cis(-twopi * static_cast<double>(r) / static_cast<double>(q));
    }
  } else {
    const double y = 0.5 * std::numbers::pi * s.calT;  // phase / (2 pi n^2)
    for (int i = 0; i < n_modes; ++i) {
      double n2 = static_cast<double>(i + 1) * static_cast<double>(i + 1);
      double hi = n2 * y;
      double lo = std::fma(n2, y, -hi);
      double frac = hi - std::floor(hi);
      frac += lo;
      frac -= std::floor(frac);
      ph[i] = detail::cis(-twopi * frac);
    }
  }
  return ph;
}

inline void free_step(Wave& w, const PropagatorSetup& s) {
  auto ph = free_phases(s, w.n_modes());
  for (int i = 0; i < w.n_modes(); ++i) w.c[static_cast<std::size_t>(i)] *= ph[static_cast<std::size_t>(i)];
}

struct KickDiag {
  double norm_lost = 0.0;
};

// Multiply by exp(sign * i J x^2) on an oversampled grid, re-analyze and
// truncate back to the original mode count. Throws when the truncated mass
// exceeds the 1e-6 budget.
inline KickDiag kick(Wave& w, double J, int sign, const PropagatorSetup& s) {
  const int n = w.n_modes();
  if (J == 0.0) return KickDiag{0.0};
  const int m = s.oversample * n;
  auto grid = sine_synthesis(w, m);
  for (int i = 0; i < m; ++i) {
    double x = static_cast<double>(i + 1) / (m + 1);
    grid[static_cast<std::size_t>(i)] *= detail::cis(sign * J * x * x);
  }
  Wave full = sine_analysis(grid);
  double lost = 0.0;
  for (int i = n; i < m; ++i) lost += std::norm(full.c[static_cast<std::size_t>(i)]);
  full.c.resize(n);
  w = std::move(full);
  if (lost > 1e-6)
    throw truncation_error("truncation overflow: kick lost more than 1e-6 of the norm");
  return KickDiag{lost};
}

// One full period. as_written applies the operators in the order of the
// displayed Floquet factorization (free, kick J1, free, kick J2); jump_first
// follows the derivation order with the kick at the start of each half.
inline KickDiag full_period(Wave& w, const PropagatorSetup& s,
                            KickOrder order = KickOrder::as_written) {
  KickDiag total{0.0};
  if (order == KickOrder::as_written) {
    free_step(w, s);
    total.norm_lost += kick(w, s.J1, -1, s).norm_lost;
    free_step(w, s);
    total.norm_lost += kick(w, s.J2, +1, s).norm_lost;
  } else {
    total.norm_lost += kick(w, s.J1, -1, s).norm_lost;
    free_step(w, s);
    total.norm_lost += kick(w, s.J2, +1, s).norm_lost;
    free_step(w, s);
  }
  return total;
}

// E = 1/2 sum (n pi)^2 |c_n|^2. Equal to the section-averaged form
// -(1/2q) <Phi, Laplace Phi> for every q; the shifted copies average out by
// the evenness and 2-periodicity of the extended integrand.
inline double energy(const Wave& w, int /*q*/ = 1) {
  double e = 0.0;
  for (int i = 0; i < w.n_modes(); ++i) {
    double npi = (i + 1) * std::numbers::pi;
    e += npi * npi * std::norm(w.c[static_cast<std::size_t>(i)]);
  }
  return 0.5 * e;
}

struct EnergySeries {
  std::vector<double> E;  // E[N] after N periods, starting at N = 0
  double a = 0.0;
  double b = 0.0;
  double c = 0.0;
  double residual_rms = 0.0;
  bool aborted = false;
  long long periods_done = 0;
};

namespace detail {

inline void fit_quadratic(EnergySeries& series) {
  const long long last = series.periods_done;
  const long long first = last / 2;
  const long long count = last - first + 1;
  if (count < 3) {
    series.a = series.b = series.c = std::numeric_limits<double>::quiet_NaN();
    series.residual_rms = std::numeric_limits<double>::quiet_NaN();
    return;
  }
  double nbar = 0.5 * static_cast<double>(first + last);
  Eigen::MatrixXd X(count, 3);
  Eigen::VectorXd yv(count);
  for (long long i = 0; i < count; ++i) {
    double u = static_cast<double>(first + i) - nbar;
    X(i, 0) = u * u;
    X(i, 1) = u;
    X(i, 2) = 1.0;
    yv(i) = series.E[static_cast<std::size_t>(first + i)];
  }
  Eigen::Vector3d beta = X.colPivHouseholderQr().solve(yv);
  series.a = beta[0];
  series.b = beta[1] - 2.0 * beta[0] * nbar;
  series.c = beta[2] + beta[0] * nbar * nbar - beta[1] * nbar;
  series.residual_rms = std::sqrt((X * beta - yv).squaredNorm() / static_cast<double>(count));
}

}  // namespace detail

// Evolve N periods recording E(N) and fit a quadratic over the late window
// [N/2, N]. A truncation overflow aborts with the partial series.
inline EnergySeries evolve_and_fit(Wave w, const PropagatorSetup& s, long long n_periods,
                                   KickOrder order = KickOrder::as_written) {
  EnergySeries series;
  series.E.push_back(energy(w));
  for (long long n = 1; n <= n_periods; ++n) {
    try {
      full_period(w, s, order);
    } catch (const truncation_error&) {
      series.aborted = true;
      break;
    }
    series.E.push_back(energy(w));
    series.periods_done = n;
  }
  detail::fit_quadratic(series);
  return series;
}

// Stopping-the-wall transform W(t)^{-1} from L^2(0, l(t)) to L^2(0, 1) on
// index-matched uniform grids, with the imaginary unit in the exponent so
// the map is unitary.
inline std::vector<Complex> stop_wall_inverse(const std::vector<Complex>& f, double t,
                                              const ModelParams& mp) {
  double l = wall_position(mp, t);
  double ld = wall_velocity(mp, t);
  const int m = static_cast<int>(f.size());
  std::vector<Complex> out(f.size());
  for (int i = 0; i < m; ++i) {
    double x = static_cast<double>(i + 1) / (m + 1);
    out[static_cast<std::size_t>(i)] =
        std::sqrt(l) * detail::cis(-0.25 * l * ld * x * x) * f[static_cast<std::size_t>(i)];
  }
  return out;
}

inline std::vector<Complex> stop_wall_forward(const std::vector<Complex>& g, double t,
                                              const ModelParams& mp) {
  double l = wall_position(mp, t);
  double ld = wall_velocity(mp, t);
  const int m = static_cast<int>(g.size());
  std::vector<Complex> out(g.size());
  for (int i = 0; i < m; ++i) {
    double x = static_cast<double>(i + 1) / (m + 1);
    out[static_cast<std::size_t>(i)] =
        detail::cis(0.25 * l * ld * x * x) * g[static_cast<std::size_t>(i)] / std::sqrt(l);
  }
  return out;
}

}  // namespace ful
