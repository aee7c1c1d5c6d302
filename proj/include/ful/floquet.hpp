#pragma once

// Resonant Floquet matrices of the quantum accelerator: the gamma mixing
// table, the q x q unitaries S(x), R(x), eigenphases of the monodromy RS,
// quasi-energy spectra with branch tracking, and the quadratic growth
// coefficient as a quadratic form in the tracked eigenphase derivatives.

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <numeric>
#include <thread>
#include <vector>

#include "ful/common.hpp"
#include "ful/model.hpp"

namespace ful {

using Complex = std::complex<double>;

namespace detail {

inline Complex cis(double a) { return Complex{std::cos(a), std::sin(a)}; }

template <typename Fn>
inline void parallel_for(long long n, int threads, Fn&& fn) {
  if (threads <= 1 || n < 2) {
    for (long long i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  std::size_t nt = std::min<long long>(threads, n);
  for (std::size_t t = 0; t < nt; ++t)
    pool.emplace_back([&, t] {
      for (long long i = static_cast<long long>(t); i < n; i += static_cast<long long>(nt)) fn(i);
    });
  for (auto& th : pool) th.join();
}

}  // namespace detail

struct GammaTable {
  long long p = 1;
  int q = 1;
  Eigen::VectorXcd gamma;  // gamma_0 .. gamma_{q-1}, cyclic and symmetric
};

// gamma_n = (1/q) sum_m exp(-2 pi i m^2 p / q) cos(2 pi n m / q).
// Angles are reduced with exact integer arithmetic mod q.
inline GammaTable gamma_table(long long p, int q) {
  if (p <= 0 || q <= 0) throw config_error("resonance orders must be positive");
  if (std::gcd(p, static_cast<long long>(q)) != 1)
    throw config_error("resonance orders must be coprime");
  GammaTable tab;
  tab.p = p;
  tab.q = q;
  tab.gamma.resize(q);
  const double twopi = 2.0 * std::numbers::pi;
  for (int n = 0; n < q; ++n) {
    Complex acc{0.0, 0.0};
    for (int m = 0; m < q; ++m) {
      long long quad = (static_cast<long long>(m) * m % q) * (p % q) % q;
      long long mix = static_cast<long long>(n) * m % q;
      acc += detail::cis(-twopi * static_cast<double>(quad) / q) *
             std::cos(twopi * static_cast<double>(mix) / q);
    }
    tab.gamma[n] = acc / static_cast<double>(q);
  }
  return tab;
}

inline Eigen::MatrixXcd gamma_matrix(const GammaTable& tab) {
  const int q = tab.q;
  Eigen::MatrixXcd G(q, q);
  for (int m = 0; m < q; ++m)
    for (int n = 0; n < q; ++n) G(m, n) = tab.gamma[((n - m) % q + q) % q];
  return G;
}

// Reduce mod 2 into (-1, 1); values within 1e-13 of +-1 are singular.
inline double fold(double x) {
  if (!std::isfinite(x)) throw config_error("fold expects a finite argument");
  double r = std::remainder(x, 2.0);
  if (std::fabs(std::fabs(r) - 1.0) < 1e-13)
    throw boundary_fold_error("folded coordinate on the +-1 boundary");
  return r;
}

struct FloquetMatrices {
  double x = 0.0;
  Eigen::MatrixXcd S;  // first half-period, S_{mn} = alpha_m gamma_{n-m}
  Eigen::MatrixXcd R;  // second half-period, R_{mn} = beta_m gamma_{n-m}
};

inline FloquetMatrices build_matrices(const ModelParams& mp, long long p, int q, double x) {
  GammaTable tab = gamma_table(p, q);
  Eigen::MatrixXcd G = gamma_matrix(tab);
  Eigen::VectorXcd alpha(q), beta(q);
  for (int m = 0; m < q; ++m) {
    double xm = fold(x + 2.0 * m / q);
    alpha[m] = detail::cis(-mp.J1 * xm * xm);
    beta[m] = detail::cis(mp.J2 * xm * xm);
  }
  FloquetMatrices fm;
  fm.x = x;
  fm.S = alpha.asDiagonal() * G;
  fm.R = beta.asDiagonal() * G;
  double uS = (fm.S * fm.S.adjoint() - Eigen::MatrixXcd::Identity(q, q)).cwiseAbs().maxCoeff();
  double uR = (fm.R * fm.R.adjoint() - Eigen::MatrixXcd::Identity(q, q)).cwiseAbs().maxCoeff();
  if (uS > 1e-10 || uR > 1e-10) throw error("Floquet matrices failed the unitarity check");
  return fm;
}

struct EigenSystem {
  Eigen::VectorXd xi;   // eigenphases in (-pi, pi], ascending
  Eigen::MatrixXcd Q;   // orthonormal eigenvectors (columns)
  double residual = 0.0;
};

// Eigendecomposition of a unitary matrix via complex Schur reduction; for a
// normal matrix the Schur factor is diagonal up to roundoff, so the unitary
// transform columns are orthonormal eigenvectors even at degeneracies.
inline EigenSystem eigenphases(const Eigen::MatrixXcd& M, double unitary_tol = 1e-10) {
  const int q = static_cast<int>(M.rows());
  double u = (M * M.adjoint() - Eigen::MatrixXcd::Identity(q, q)).cwiseAbs().maxCoeff();
  if (u > unitary_tol) throw not_unitary_error("matrix is not unitary");

  Eigen::ComplexSchur<Eigen::MatrixXcd> schur(M, true);
  if (schur.info() != Eigen::Success) throw error("Schur decomposition failed");
  Eigen::VectorXcd lambda = schur.matrixT().diagonal();
  Eigen::MatrixXcd Q = schur.matrixU();

  EigenSystem sys;
  sys.xi.resize(q);
  std::vector<int> order(q);
  std::iota(order.begin(), order.end(), 0);
  Eigen::VectorXd xi_raw(q);
  for (int j = 0; j < q; ++j) {
    double a = std::arg(lambda[j]);
    if (a <= -std::numbers::pi) a += 2.0 * std::numbers::pi;
    xi_raw[j] = a;
  }
  std::sort(order.begin(), order.end(), [&](int a, int b) { return xi_raw[a] < xi_raw[b]; });
  sys.Q.resize(q, q);
  Eigen::VectorXcd lam_sorted(q);
  for (int j = 0; j < q; ++j) {
    sys.xi[j] = xi_raw[order[j]];
    sys.Q.col(j) = Q.col(order[j]);
    lam_sorted[j] = lambda[order[j]];
  }
  sys.residual = (M * sys.Q - sys.Q * lam_sorted.asDiagonal()).cwiseAbs().maxCoeff();
  if (sys.residual > 1e-10) throw error("eigendecomposition residual above the quality gate");
  return sys;
}

struct SpectrumSample {
  double x0 = 0.0;
  Eigen::VectorXd xi;   // branch-ordered eigenphases
  Eigen::VectorXd rho;  // quasi-energies -xi/(2 calT)
  Eigen::MatrixXcd Qmat;
};

struct BranchSummary {
  double rho_min = 0.0;
  double rho_max = 0.0;
  double rho_first = 0.0;  // value at the smallest grid x0
  double rho_last = 0.0;   // value at the largest grid x0
  bool degenerate = false;
};

struct Spectrum {
  std::vector<SpectrumSample> samples;
  std::vector<BranchSummary> branches;
  double calT = 0.0;
};

// Midpoint grid of n points plus near-boundary samples, so band extents reach
// their x -> 0, 1 limits. Even n keeps x = 1/2 (a frequent crossing point)
// off the grid.
inline std::vector<double> spectrum_grid(int n, double delta = 1e-9) {
  if (n < 2) throw config_error("grid needs at least two points");
  std::vector<double> g;
  g.reserve(n + 2);
  g.push_back(delta);
  for (int i = 0; i < n; ++i) g.push_back((i + 0.5) / n);
  g.push_back(1.0 - delta);
  return g;
}

namespace detail {

// Match new eigenvectors to the previous branches by maximal overlap,
// falling back to eigenphase proximity for overlaps below 1/2.
inline std::vector<int> match_branches(const Eigen::MatrixXcd& Q_prev,
                                       const EigenSystem& next,
                                       const Eigen::VectorXd& xi_prev) {
  const int q = static_cast<int>(Q_prev.cols());
  Eigen::MatrixXd overlap = (Q_prev.adjoint() * next.Q).cwiseAbs();
  std::vector<int> branch_of(q, -1);  // new column -> branch
  std::vector<bool> used_branch(q, false), used_col(q, false);
  for (int pick = 0; pick < q; ++pick) {
    int bj = -1, ck = -1;
    double best = -1.0;
    for (int j = 0; j < q; ++j) {
      if (used_branch[j]) continue;
      for (int c = 0; c < q; ++c) {
        if (used_col[c]) continue;
        if (overlap(j, c) > best) {
          best = overlap(j, c);
          bj = j;
          ck = c;
        }
      }
    }
    if (best < 0.5) {
      // phase proximity over the remaining pairs
      auto dist = [](double a, double b) {
        return std::fabs(std::remainder(a - b, 2.0 * std::numbers::pi));
      };
      double best_d = 1e300;
      bj = ck = -1;
      for (int j = 0; j < q; ++j) {
        if (used_branch[j]) continue;
        for (int c = 0; c < q; ++c) {
          if (used_col[c]) continue;
          double d = dist(next.xi[c], xi_prev[j]);
          if (d < best_d) {
            best_d = d;
            bj = j;
            ck = c;
          }
        }
      }
      // ambiguous when the chosen branch is equidistant from two genuinely
      // different new eigenvalues
      for (int c = 0; c < q; ++c) {
        if (used_col[c] || c == ck) continue;
        if (std::fabs(dist(next.xi[c], xi_prev[bj]) - best_d) < 1e-12 &&
            std::fabs(std::remainder(next.xi[c] - next.xi[ck], 2.0 * std::numbers::pi)) > 1e-12)
          throw tracking_error(
              "tracking ambiguity: eigenvector overlap below 1/2 and tied phases");
      }
    }
    used_branch[bj] = used_col[ck] = true;
    branch_of[ck] = bj;
  }
  return branch_of;
}

}  // namespace detail

// Quasi-energy spectrum over a grid of section points x0, with eigenvalue
// branches tracked continuously by eigenvector overlap.
inline Spectrum quasienergy_spectrum(const ModelParams& mp, long long p, int q,
                                     const std::vector<double>& grid, int threads = 1) {
  if (grid.size() < 2) throw config_error("grid needs at least two points");
  for (std::size_t i = 1; i < grid.size(); ++i)
    if (!(grid[i] > grid[i - 1])) throw config_error("grid must be strictly increasing");
  if (!(grid.front() > 0.0 && grid.back() < 1.0))
    throw config_error("grid must lie inside (0, 1)");

  std::vector<EigenSystem> raw(grid.size());
  detail::parallel_for(static_cast<long long>(grid.size()), threads, [&](long long i) {
    FloquetMatrices fm = build_matrices(mp, p, q, grid[static_cast<std::size_t>(i)]);
    raw[static_cast<std::size_t>(i)] = eigenphases(fm.R * fm.S);
  });

  Spectrum spec;
  spec.calT = mp.calT;
  spec.samples.resize(grid.size());
  Eigen::MatrixXcd Q_prev;
  Eigen::VectorXd xi_prev;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const EigenSystem& sys = raw[i];
    SpectrumSample& smp = spec.samples[i];
    smp.x0 = grid[i];
    smp.xi.resize(q);
    smp.rho.resize(q);
    smp.Qmat.resize(q, q);
    if (i == 0) {
      smp.xi = sys.xi;
      smp.Qmat = sys.Q;
    } else {
      std::vector<int> branch_of = detail::match_branches(Q_prev, sys, xi_prev);
      for (int c = 0; c < q; ++c) {
        smp.xi[branch_of[c]] = sys.xi[c];
        smp.Qmat.col(branch_of[c]) = sys.Q.col(c);
      }
    }
    for (int j = 0; j < q; ++j) smp.rho[j] = -smp.xi[j] / (2.0 * mp.calT);
    Q_prev = smp.Qmat;
    xi_prev = smp.xi;
  }

  spec.branches.resize(q);
  for (int j = 0; j < q; ++j) {
    BranchSummary& b = spec.branches[j];
    b.rho_min = b.rho_max = spec.samples.front().rho[j];
    double xi_min = spec.samples.front().xi[j], xi_max = xi_min;
    for (const auto& smp : spec.samples) {
      b.rho_min = std::min(b.rho_min, smp.rho[j]);
      b.rho_max = std::max(b.rho_max, smp.rho[j]);
      xi_min = std::min(xi_min, smp.xi[j]);
      xi_max = std::max(xi_max, smp.xi[j]);
    }
    b.rho_first = spec.samples.front().rho[j];
    b.rho_last = spec.samples.back().rho[j];
    b.degenerate = (xi_max - xi_min) < 1e-8;
  }
  return spec;
}

// Wave vector Phi(x) = (phi(x), phi(x + 2/q), ...) sampled on a grid, using
// the odd 2-periodic extension implicit in the sine series.
struct WaveOnGrid {
  std::vector<double> x;
  std::vector<Eigen::VectorXcd> phi;  // one q-vector per grid point
};

inline WaveOnGrid sample_wave_vector(const std::vector<Complex>& sine_coeffs, int q,
                                     const std::vector<double>& grid) {
  WaveOnGrid w;
  w.x = grid;
  w.phi.resize(grid.size());
  const double pi = std::numbers::pi;
  const double root2 = std::numbers::sqrt2;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    Eigen::VectorXcd v(q);
    for (int m = 0; m < q; ++m) {
      double y = grid[i] + 2.0 * m / q;
      Complex acc{0.0, 0.0};
      for (std::size_t n = 0; n < sine_coeffs.size(); ++n)
        acc += sine_coeffs[n] * root2 * std::sin((n + 1) * pi * y);
      v[m] = acc;
    }
    w.phi[i] = v;
  }
  return w;
}

// Quadratic growth coefficient from a tracked spectrum:
// a = (1/2q) < Q^{-1} Phi, diag((xi')^2) Q^{-1} Phi >, with xi' by wrapped
// central differences and the integral by the trapezoid rule on the grid.
inline double quad_coeff_from_spectrum(const Spectrum& spec, const WaveOnGrid& wave, int q) {
  const std::size_t n = spec.samples.size();
  if (wave.x.size() != n) throw config_error("wave grid does not match the spectrum grid");

  auto dphase = [](double a, double b) {
    return std::remainder(a - b, 2.0 * std::numbers::pi);
  };
  std::vector<double> integrand(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t lo = i == 0 ? 0 : i - 1;
    std::size_t hi = i == n - 1 ? n - 1 : i + 1;
    double dx = spec.samples[hi].x0 - spec.samples[lo].x0;
    Eigen::VectorXcd y = spec.samples[i].Qmat.adjoint() * wave.phi[i];
    double acc = 0.0;
    for (int j = 0; j < q; ++j) {
      double xip = dphase(spec.samples[hi].xi[j], spec.samples[lo].xi[j]) / dx;
      acc += xip * xip * std::norm(y[j]);
    }
    integrand[i] = acc;
  }
  double integral = 0.0;
  for (std::size_t i = 0; i + 1 < n; ++i)
    integral += 0.5 * (integrand[i] + integrand[i + 1]) * (wave.x[i + 1] - wave.x[i]);
  return integral / (2.0 * q);
}

inline double quad_coeff(const ModelParams& mp, long long p, int q, const WaveOnGrid& wave,
                         int threads = 1) {
  Spectrum spec = quasienergy_spectrum(mp, p, q, wave.x, threads);
  return quad_coeff_from_spectrum(spec, wave, q);
}

enum class HalfPeriod { first, second };
enum class KickOrder { as_written, jump_first };

// Action of the reduced half-period Floquet operator on grid samples
// f_j = phi(j/(M+1)), j = 1..M, with shifts evaluated through the odd
// 2-periodic extension. as_written applies the gamma mixing before the kick
// multiplier (the S, R row convention); jump_first applies the kick at the
// start of the half period.
inline std::vector<Complex> apply_reduced_floquet(const std::vector<Complex>& f,
                                                  const ModelParams& mp, long long p, int q,
                                                  HalfPeriod half,
                                                  KickOrder order = KickOrder::as_written) {
  const long long M = static_cast<long long>(f.size());
  if ((M + 1) % q != 0)
    throw config_error("grid size M requires q | (M+1) for exact shifts");
  GammaTable tab = gamma_table(p, q);
  const long long step = 2 * (M + 1) / q;
  const double J = half == HalfPeriod::first ? -mp.J1 : mp.J2;

  auto fetch = [&](long long j) -> Complex {
    long long r = ((j % (2 * (M + 1))) + 2 * (M + 1)) % (2 * (M + 1));
    if (r == 0 || r == M + 1) return Complex{0.0, 0.0};
    return r < M + 1 ? f[static_cast<std::size_t>(r - 1)]
                     : -f[static_cast<std::size_t>(2 * (M + 1) - r - 1)];
  };
  auto kick_at = [&](long long j) -> Complex {
    double y = static_cast<double>(j) / static_cast<double>(M + 1);
    double yt = std::remainder(y, 2.0);
    return detail::cis(J * yt * yt);
  };

  std::vector<Complex> out(f.size());
  for (long long j = 1; j <= M; ++j) {
    Complex acc{0.0, 0.0};
    for (int n = 0; n < q; ++n) {
      long long js = j + n * step;
      Complex val = fetch(js);
      if (order == KickOrder::jump_first) val *= kick_at(js);
      acc += tab.gamma[n] * val;
    }
    if (order == KickOrder::as_written) acc *= kick_at(j);
    out[static_cast<std::size_t>(j - 1)] = acc;
  }
  return out;
}

}  // namespace ful
