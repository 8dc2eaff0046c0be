#include <algorithm>
#include <chrono>
#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "freebrown/rmt.hpp"

using namespace freebrown;

TEST(Ginibre, EntryVariance) {
  Rng rng(42);
  const int draws = 100000;
  double sum = 0.0, sum2 = 0.0;
  for (int i = 0; i < draws; ++i) {
    const double v = std::norm(sample_ginibre(1, rng)(0, 0));
    sum += v;
    sum2 += v * v;
  }
  const double mean = sum / draws;
  const double sigma = std::sqrt((sum2 / draws - mean * mean) / draws);
  EXPECT_NEAR(mean, 1.0, 3.0 * sigma);
}

TEST(Ginibre, TraceNormalization) {
  double acc = 0.0;
  for (std::size_t t = 0; t < 50; ++t) {
    Rng rng = trial_stream(9, t);
    const ComplexMatrix g = sample_ginibre(256, rng);
    acc += (g * g.adjoint()).trace().real() / 256.0;
  }
  EXPECT_NEAR(acc / 50.0, 1.0, 0.02);
}

TEST(Ginibre, SeedReproducesMatrix) {
  Rng a = trial_stream(123, 4), b = trial_stream(123, 4), c = trial_stream(123, 5);
  const ComplexMatrix x = sample_ginibre(16, a);
  EXPECT_TRUE(x == sample_ginibre(16, b));
  EXPECT_FALSE(x == sample_ginibre(16, c));
}

TEST(Haar, Unitarity) {
  Rng rng(1);
  const ComplexMatrix u = sample_haar_unitary(128, rng);
  EXPECT_LT((u.adjoint() * u - ComplexMatrix::Identity(128, 128)).cwiseAbs().maxCoeff(), 1e-10);
  for (const auto& z : eigenvalues(u)) EXPECT_NEAR(std::abs(z), 1.0, 1e-8);
}

TEST(Haar, TraceVanishes) {
  std::complex<double> acc = 0.0;
  for (std::size_t t = 0; t < 100; ++t) {
    Rng rng = trial_stream(17, t);
    acc += sample_haar_unitary(256, rng).trace() / 256.0;
  }
  EXPECT_LT(std::abs(acc / 100.0), 0.05);
}

TEST(Haar, OneByOnePhaseIsUniform) {
  Rng rng(5);
  std::vector<double> phases;
  for (int i = 0; i < 4000; ++i) {
    const std::complex<double> z = sample_haar_unitary(1, rng)(0, 0);
    EXPECT_NEAR(std::abs(z), 1.0, 1e-12);
    phases.push_back(std::arg(z));
  }
  std::sort(phases.begin(), phases.end());
  const double ks =
      ks_distance(phases, [](double a) { return (a + std::numbers::pi) / (2.0 * std::numbers::pi); });
  EXPECT_LT(ks, 1.63 / std::sqrt(4000.0));
}

TEST(Haar, TruncationIsAContraction) {
  Rng rng(8);
  const ComplexMatrix a = sample_truncated_haar(64, 32, rng);
  EXPECT_EQ(a.rows(), 32);
  for (double s : singular_values(a)) EXPECT_LE(s, 1.0 + 1e-12);
}

TEST(Product, PowerZeroIsGinibre) {
  Rng a(3), b(3);
  EXPECT_TRUE(sample_ginibre_product(8, 0, a) == sample_ginibre(8, b));
}

TEST(Product, InverseBySolve) {
  Rng a(4), b(4);
  std::size_t resamples = 0;
  const ComplexMatrix x = sample_ginibre_product(32, 2, a, &resamples);
  const ComplexMatrix g1 = sample_ginibre(32, b);
  const ComplexMatrix g2 = sample_ginibre(32, b);
  EXPECT_EQ(resamples, 0u);
  EXPECT_LT((x * g2 * g2 - g1).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(Linalg, EigenAndSingularValues) {
  ComplexMatrix d = ComplexMatrix::Zero(3, 3);
  d(0, 0) = {2.0, 0.0};
  d(1, 1) = {0.0, -3.0};
  d(2, 2) = {1.0, 1.0};
  d(0, 2) = {0.5, 0.0};
  std::vector<double> radii;
  for (const auto& z : eigenvalues(d)) radii.push_back(std::abs(z));
  std::sort(radii.begin(), radii.end());
  EXPECT_NEAR(radii[0], std::sqrt(2.0), 1e-14);
  EXPECT_NEAR(radii[1], 2.0, 1e-14);
  EXPECT_NEAR(radii[2], 3.0, 1e-14);
  const std::vector<double> s = singular_values(ComplexMatrix::Identity(4, 4) * 2.5);
  for (double v : s) EXPECT_NEAR(v, 2.5, 1e-14);
}

TEST(KS, KnownDistance) {
  EXPECT_NEAR(ks_distance({0.5}, [](double x) { return x; }), 0.5, 1e-15);
  EXPECT_NEAR(ks_distance({0.25, 0.75}, [](double x) { return x; }), 0.25, 1e-15);
  EXPECT_NEAR(ks_distance({0.9, 0.95}, [](double x) { return x; }), 0.9, 1e-15);
}

TEST(Experiment, Reproducible) {
  const RadialBrownMeasure disk = brown_from_s(stable_s_table({0.0, 1.0}), 0.0);
  EnsembleSpec spec = EnsembleSpec::ginibre(48);
  spec.with_trials(4).with_seed(99);
  const ExperimentReport a = run_experiment(spec, disk, 1.0);
  const ExperimentReport b = run_experiment(spec, disk, 1.0, "", 3);
  EXPECT_EQ(a.scaled_radii, b.scaled_radii);
  EXPECT_EQ(a.ks, b.ks);
  EXPECT_TRUE(std::is_sorted(a.scaled_radii.begin(), a.scaled_radii.end()));
  EXPECT_GE(a.ks, 0.0);
  EXPECT_LE(a.ks, 1.0);
  spec.with_seed(100);
  EXPECT_NE(run_experiment(spec, disk, 1.0).scaled_radii, a.scaled_radii);
}

TEST(Experiment, GinibreSmallCircularLaw) {
  const RadialBrownMeasure disk = brown_from_s(stable_s_table({0.0, 1.0}), 0.0);
  EnsembleSpec spec = EnsembleSpec::ginibre(128);
  spec.with_trials(8).with_seed(1);
  EXPECT_LT(run_experiment(spec, disk, 1.0).ks, 0.05);
}

TEST(Experiment, TruncatedHaarImprovesWithSize) {
  // Median per-trial KS distance against the s = 2 prediction.
  const RadialBrownMeasure pred = compressed_brown(point_mass(1.0), {2.0, Scaling::sqrt_s});
  auto median_ks = [&](std::size_t n) {
    std::vector<double> ks;
    for (std::size_t t = 0; t < 20; ++t) {
      EnsembleSpec spec = EnsembleSpec::truncated_haar(n, n / 2);
      spec.with_trials(1).with_seed(1000 + t);
      ks.push_back(run_experiment(spec, pred, std::sqrt(2.0)).ks);
    }
    std::nth_element(ks.begin(), ks.begin() + 10, ks.end());
    return ks[10];
  };
  EXPECT_LT(median_ks(512), median_ks(128));
}

TEST(FreeSum, SmokeIsFast) {
  const auto start = std::chrono::steady_clock::now();
  const ExperimentReport r = free_sum_check(1, 64, 1, 7);
  const double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  EXPECT_EQ(r.scaled_radii.size(), 64u);
  EXPECT_LT(elapsed, 1.0);
  EXPECT_NEAR(r.scaling, 0.5, 1e-15);
}

TEST(FreeSum, GaussianAdditivity) {
  EXPECT_LT(free_sum_check(0, 128, 8, 3).ks, 0.05);
}

TEST(SingularMoments, Edges) {
  const MomentCheck zero = singular_moment_check(1, 0.0, 16, 1, 1);
  EXPECT_EQ(zero.empirical, 1.0);
  EXPECT_EQ(zero.predicted.value(), 1.0);
  const MomentCheck near = singular_moment_check(1, 0.45, 64, 2, 1);
  EXPECT_TRUE(near.near_divergent);
  EXPECT_TRUE(std::isfinite(near.empirical));
  EXPECT_GT(near.predicted.value(), 2.0);
  EXPECT_FALSE(singular_moment_check(1, 0.25, 32, 2, 1).near_divergent);
  EXPECT_THROW(singular_moment_check(1, 0.5, 16, 1, 1), Error);
}

TEST(Spec, Validation) {
  EXPECT_THROW(EnsembleSpec::truncated_haar(4, 5).validate(), Error);
  EXPECT_THROW(EnsembleSpec::ginibre(0).validate(), Error);
  EnsembleSpec zero = EnsembleSpec::ginibre(4);
  zero.trials = 0;
  EXPECT_THROW(zero.validate(), Error);
  EXPECT_THROW(EnsembleSpec::free_sum({EnsembleSpec::ginibre(4), EnsembleSpec::ginibre(5)}).validate(), Error);
}
