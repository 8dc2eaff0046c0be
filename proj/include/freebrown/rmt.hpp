#pragma once

// Finite random matrix models whose eigenvalue and singular value statistics
// approximate the Brown measures computed elsewhere in the library.
// Eigenvalues and singular values come from LAPACK (zgeev, zgesdd).

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <mutex>
#include <random>
#include <string>
#include <thread>
#include <vector>

#include <Eigen/Dense>

#ifndef lapack_complex_double
#define lapack_complex_double std::complex<double>
#endif
#include <lapacke.h>

#include "freebrown/error.hpp"
#include "freebrown/measures.hpp"
#include "freebrown/stable.hpp"

namespace freebrown {

using ComplexMatrix = Eigen::MatrixXcd;
using Rng = std::mt19937_64;

enum class EnsembleKind { ginibre, haar_unitary, truncated_haar, ginibre_product, free_sum };

inline std::string to_string(EnsembleKind kind) {
  switch (kind) {
    case EnsembleKind::ginibre: return "ginibre";
    case EnsembleKind::haar_unitary: return "haar_unitary";
    case EnsembleKind::truncated_haar: return "truncated_haar";
    case EnsembleKind::ginibre_product: return "ginibre_product";
    case EnsembleKind::free_sum: return "free_sum";
  }
  return "unknown";
}

/// Random matrix ensemble. For truncated_haar, m is the size of the leading
/// block kept from an n x n Haar unitary; for ginibre_product, the sample is
/// G1 G2^{-k}; free_sum adds independent samples of each part (all of size n).
struct EnsembleSpec {
  EnsembleKind kind = EnsembleKind::ginibre;
  std::size_t n = 1;
  std::size_t m = 1;
  int k = 1;
  std::vector<EnsembleSpec> parts;
  std::size_t trials = 1;
  std::uint64_t seed = 0;

  static EnsembleSpec ginibre(std::size_t n) { return {EnsembleKind::ginibre, n, n, 0, {}, 1, 0}; }
  static EnsembleSpec haar_unitary(std::size_t n) { return {EnsembleKind::haar_unitary, n, n, 0, {}, 1, 0}; }
  static EnsembleSpec truncated_haar(std::size_t n, std::size_t m) {
    return {EnsembleKind::truncated_haar, n, m, 0, {}, 1, 0};
  }
  static EnsembleSpec ginibre_product(std::size_t n, int k) { return {EnsembleKind::ginibre_product, n, n, k, {}, 1, 0}; }
  static EnsembleSpec free_sum(std::vector<EnsembleSpec> parts) {
    const std::size_t n = parts.empty() ? 0 : parts.front().n;
    return {EnsembleKind::free_sum, n, n, 0, std::move(parts), 1, 0};
  }

  EnsembleSpec& with_trials(std::size_t t) {
    trials = t;
    return *this;
  }
  EnsembleSpec& with_seed(std::uint64_t s) {
    seed = s;
    return *this;
  }

  /// Size of the sampled matrix.
  std::size_t dimension() const { return kind == EnsembleKind::truncated_haar ? m : n; }

  void validate() const {
    if (n < 1) throw Error(ErrorCode::Validation, "matrix size n must be >= 1");
    if (trials < 1) throw Error(ErrorCode::Validation, "trials must be >= 1");
    if (kind == EnsembleKind::truncated_haar && !(m >= 1 && m <= n)) {
      throw Error(ErrorCode::Validation, "truncation size must satisfy 1 <= m <= n");
    }
    if (kind == EnsembleKind::ginibre_product && k < 0) throw Error(ErrorCode::Validation, "power k must be >= 0");
    if (kind == EnsembleKind::free_sum) {
      if (parts.empty()) throw Error(ErrorCode::Validation, "free sum needs at least one part");
      for (const EnsembleSpec& p : parts) {
        p.validate();
        if (p.dimension() != dimension()) throw Error(ErrorCode::Validation, "free sum parts must share the size");
      }
    }
  }
};

struct ExperimentReport {
  EnsembleSpec spec;
  double scaling = 1.0;
  std::vector<double> scaled_radii;  // sorted
  double ks = 0.0;
  std::size_t n_resamples = 0;
  std::string predicted_ref;
  double wall_time_s = 0.0;
};

/// Independent stream for trial i of a master seed.
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

inline Rng trial_stream(std::uint64_t master, std::size_t index) {
  return Rng(splitmix64(master + 0x9E3779B97F4A7C15ULL * static_cast<std::uint64_t>(index + 1)));
}

/// rows x cols matrix of i.i.d. complex Gaussians with E|g|^2 = 1/n.
inline ComplexMatrix sample_gaussian(std::size_t rows, std::size_t cols, std::size_t n, Rng& rng) {
  std::normal_distribution<double> normal(0.0, std::sqrt(0.5 / static_cast<double>(n)));
  ComplexMatrix g(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (Eigen::Index j = 0; j < g.cols(); ++j) {
    for (Eigen::Index i = 0; i < g.rows(); ++i) {
      const double re = normal(rng);
      const double im = normal(rng);
      g(i, j) = {re, im};
    }
  }
  return g;
}

inline ComplexMatrix sample_ginibre(std::size_t n, Rng& rng) {
  if (n < 1) throw Error(ErrorCode::Validation, "matrix size n must be >= 1");
  return sample_gaussian(n, n, n, rng);
}

/// First `cols` columns of an n x n Haar unitary: thin QR of a Gaussian
/// n x cols matrix with Q multiplied by the phases of diag(R).
inline ComplexMatrix sample_haar_columns(std::size_t n, std::size_t cols, Rng& rng) {
  const ComplexMatrix g = sample_gaussian(n, cols, n, rng);
  Eigen::HouseholderQR<ComplexMatrix> qr(g);
  const auto ni = static_cast<Eigen::Index>(n);
  const auto ci = static_cast<Eigen::Index>(cols);
  ComplexMatrix q = qr.householderQ() * ComplexMatrix::Identity(ni, ci);
  const ComplexMatrix& r = qr.matrixQR();
  for (Eigen::Index j = 0; j < ci; ++j) {
    const std::complex<double> d = r(j, j);
    const double a = std::abs(d);
    if (!(a > 0.0) || !std::isfinite(a)) throw Error(ErrorCode::QRBreakdown, "zero pivot in Haar QR");
    q.col(j) *= d / a;
  }
  const double residual = (q.adjoint() * q - ComplexMatrix::Identity(ci, ci)).cwiseAbs().maxCoeff();
  if (!(residual < 1e-10)) {
    throw Error(ErrorCode::QRBreakdown, "Haar sample fails unitarity: " + std::to_string(residual));
  }
  return q;
}

inline ComplexMatrix sample_haar_unitary(std::size_t n, Rng& rng) {
  if (n < 1) throw Error(ErrorCode::Validation, "matrix size n must be >= 1");
  return sample_haar_columns(n, n, rng);
}

/// Leading m x m block of an n x n Haar unitary.
inline ComplexMatrix sample_truncated_haar(std::size_t n, std::size_t m, Rng& rng) {
  if (!(m >= 1 && m <= n)) throw Error(ErrorCode::Validation, "truncation size must satisfy 1 <= m <= n");
  const ComplexMatrix cols = sample_haar_columns(n, m, rng);
  return cols.topRows(static_cast<Eigen::Index>(m));
}

inline constexpr double kMaxCondition = 1e12;
inline constexpr std::size_t kMaxResamples = 100;

/// G1 G2^{-k}: G2 is resampled while its condition estimate exceeds 1e12.
/// The inverse is applied by k LU solves from the right.
inline ComplexMatrix sample_ginibre_product(std::size_t n, int k, Rng& rng, std::size_t* resamples = nullptr) {
  if (k < 0) throw Error(ErrorCode::Validation, "power k must be >= 0");
  ComplexMatrix x = sample_ginibre(n, rng);
  if (k == 0) return x;
  for (std::size_t attempt = 0;; ++attempt) {
    const ComplexMatrix g2 = sample_ginibre(n, rng);
    // x G2^{-1} = (G2^{-*} x^*)^*, solved with the LU of G2^*.
    Eigen::PartialPivLU<ComplexMatrix> lu(g2.adjoint());
    const double rcond = lu.rcond();
    if (!(rcond > 1.0 / kMaxCondition)) {
      if (resamples != nullptr) ++*resamples;
      if (attempt + 1 >= kMaxResamples) {
        throw Error(ErrorCode::SingularInverseFactor, "inverse factor stays ill-conditioned after resampling");
      }
      continue;
    }
    ComplexMatrix y = x.adjoint();
    for (int i = 0; i < k; ++i) y = lu.solve(y);
    return y.adjoint();
  }
}

inline std::vector<std::complex<double>> eigenvalues(ComplexMatrix a) {
  const auto n = static_cast<lapack_int>(a.rows());
  if (a.rows() != a.cols()) throw Error(ErrorCode::Validation, "eigenvalues need a square matrix");
  std::vector<std::complex<double>> w(static_cast<std::size_t>(n));
  std::complex<double> dummy{};
  const lapack_int info =
      LAPACKE_zgeev(LAPACK_COL_MAJOR, 'N', 'N', n, a.data(), n, w.data(), &dummy, 1, &dummy, 1);
  if (info != 0) throw Error(ErrorCode::SolverFailure, "zgeev failed with info " + std::to_string(info));
  return w;
}

inline std::vector<double> singular_values(ComplexMatrix a) {
  const auto m = static_cast<lapack_int>(a.rows());
  const auto n = static_cast<lapack_int>(a.cols());
  std::vector<double> s(static_cast<std::size_t>(std::min(m, n)));
  std::complex<double> dummy{};
  const lapack_int info =
      LAPACKE_zgesdd(LAPACK_COL_MAJOR, 'N', m, n, a.data(), m, s.data(), &dummy, 1, &dummy, 1);
  if (info != 0) throw Error(ErrorCode::SolverFailure, "zgesdd failed with info " + std::to_string(info));
  return s;
}

/// One sample of the ensemble.
inline ComplexMatrix sample(const EnsembleSpec& spec, Rng& rng, std::size_t* resamples = nullptr) {
  switch (spec.kind) {
    case EnsembleKind::ginibre: return sample_ginibre(spec.n, rng);
    case EnsembleKind::haar_unitary: return sample_haar_unitary(spec.n, rng);
    case EnsembleKind::truncated_haar: return sample_truncated_haar(spec.n, spec.m, rng);
    case EnsembleKind::ginibre_product: return sample_ginibre_product(spec.n, spec.k, rng, resamples);
    case EnsembleKind::free_sum: {
      ComplexMatrix acc = ComplexMatrix::Zero(static_cast<Eigen::Index>(spec.dimension()),
                                              static_cast<Eigen::Index>(spec.dimension()));
      for (const EnsembleSpec& part : spec.parts) acc += sample(part, rng, resamples);
      return acc;
    }
  }
  throw Error(ErrorCode::Validation, "unknown ensemble");
}

/// Sup distance between the empirical CDF of sorted samples and cdf.
template <class Cdf>
double ks_distance(const std::vector<double>& sorted, Cdf&& cdf) {
  const double n = static_cast<double>(sorted.size());
  double d = 0.0;
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    const double f = cdf(sorted[i]);
    d = std::max({d, f - static_cast<double>(i) / n, static_cast<double>(i + 1) / n - f});
  }
  return std::clamp(d, 0.0, 1.0);
}

/// Runs fn(trial_index, rng) for every trial on `parallel` threads. Results
/// are stored by trial index so the output does not depend on scheduling.
template <class T, class Fn>
std::vector<T> run_trials(std::size_t trials, std::uint64_t seed, std::size_t parallel, Fn&& fn) {
  std::vector<T> out(trials);
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&]() {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= trials) return;
      try {
        Rng rng = trial_stream(seed, i);
        out[i] = fn(i, rng);
      } catch (...) {
        std::lock_guard<std::mutex> lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next.store(trials);
      }
    }
  };
  const std::size_t threads = std::clamp<std::size_t>(parallel, 1, trials);
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (std::thread& th : pool) th.join();
  }
  if (failure) std::rethrow_exception(failure);
  return out;
}

namespace detail {

struct TrialRadii {
  std::vector<double> radii;
  std::size_t resamples = 0;
};

}  // namespace detail

/// Pools |lambda| * scaling over all trials and compares against the radial
/// CDF of the predicted Brown measure.
inline ExperimentReport run_experiment(const EnsembleSpec& spec, const RadialBrownMeasure& predicted, double scaling,
                                       const std::string& predicted_ref = "", std::size_t parallel = 1) {
  spec.validate();
  if (!(scaling > 0.0) || !std::isfinite(scaling)) throw Error(ErrorCode::Validation, "scaling must be positive");
  const auto start = std::chrono::steady_clock::now();
  const auto per_trial = run_trials<detail::TrialRadii>(spec.trials, spec.seed, parallel, [&](std::size_t, Rng& rng) {
    detail::TrialRadii out;
    const ComplexMatrix a = sample(spec, rng, &out.resamples);
    for (const auto& z : eigenvalues(a)) out.radii.push_back(std::abs(z) * scaling);
    return out;
  });
  ExperimentReport report;
  report.spec = spec;
  report.scaling = scaling;
  report.predicted_ref = predicted_ref;
  for (const auto& t : per_trial) {
    report.scaled_radii.insert(report.scaled_radii.end(), t.radii.begin(), t.radii.end());
    report.n_resamples += t.resamples;
  }
  std::sort(report.scaled_radii.begin(), report.scaled_radii.end());
  report.ks = ks_distance(report.scaled_radii, [&predicted](double r) { return radial_cdf(predicted, r); });
  report.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return report;
}

/// A1 + A2 with independent A_i = G_i1 G_i2^{-k}, radii scaled by
/// 2^{-(1+k)/2} and compared against mu_k.
inline ExperimentReport free_sum_check(int k, std::size_t n, std::size_t trials, std::uint64_t seed,
                                       std::size_t parallel = 1, std::size_t nodes = kDefaultQuantileNodes) {
  if (k < 0) throw Error(ErrorCode::Validation, "power k must be >= 0");
  const EnsembleSpec part = EnsembleSpec::ginibre_product(n, k);
  EnsembleSpec spec = EnsembleSpec::free_sum({part, part});
  spec.with_trials(trials).with_seed(seed);
  const double beta = static_cast<double>(k);
  const RadialBrownMeasure predicted = brown_from_s(stable_s_table({beta, 1.0}), 0.0, nodes);
  return run_experiment(spec, predicted, 1.0 / stable_scaling_factor(beta, 2.0), "mu_" + std::to_string(k), parallel);
}

struct MomentCheck {
  double empirical = 0.0;
  double standard_error = 0.0;  // across trials
  ExtendedReal predicted = ExtendedReal::finite(0.0);
  double relative_error = 0.0;
  bool near_divergent = false;
  std::size_t n_resamples = 0;
};

/// gamma above this fraction of the pole 1/(1+k) is flagged near-divergent.
inline constexpr double kNearDivergentFraction = 0.8;

/// Mean of (sigma_i^2)^gamma over the singular values of G1 G2^{-k}, against
/// the nu_k moment.
inline MomentCheck singular_moment_check(int k, double gamma, std::size_t n, std::size_t trials, std::uint64_t seed,
                                         std::size_t parallel = 1) {
  if (k < 1) throw Error(ErrorCode::Validation, "singular moment check needs k >= 1");
  if (n < 1 || trials < 1) throw Error(ErrorCode::Validation, "n and trials must be >= 1");
  const double beta = static_cast<double>(k);
  MomentCheck out;
  out.predicted = nu_beta_moment(beta, gamma);
  if (out.predicted.is_infinite()) {
    throw Error(ErrorCode::OutOfDomain, "gamma outside the convergent range (-1/2, 1/(1+k))");
  }
  out.near_divergent = gamma > kNearDivergentFraction / (1.0 + beta);
  if (gamma == 0.0) {
    out.empirical = 1.0;
    return out;
  }
  struct Trial {
    double mean = 0.0;
    std::size_t resamples = 0;
  };
  const auto per_trial = run_trials<Trial>(trials, seed, parallel, [&](std::size_t, Rng& rng) {
    Trial t;
    const ComplexMatrix a = sample_ginibre_product(n, k, rng, &t.resamples);
    double acc = 0.0;
    const std::vector<double> s = singular_values(a);
    for (double sigma : s) acc += std::pow(sigma, 2.0 * gamma);
    t.mean = acc / static_cast<double>(s.size());
    return t;
  });
  double sum = 0.0, sum2 = 0.0;
  for (const Trial& t : per_trial) {
    sum += t.mean;
    sum2 += t.mean * t.mean;
    out.n_resamples += t.resamples;
  }
  const double count = static_cast<double>(per_trial.size());
  out.empirical = sum / count;
  if (per_trial.size() > 1) {
    const double var = std::max(0.0, (sum2 - count * out.empirical * out.empirical) / (count - 1.0));
    out.standard_error = std::sqrt(var / count);
  }
  out.relative_error = std::abs(out.empirical - out.predicted.value()) / out.predicted.value();
  return out;
}

}  // namespace freebrown
