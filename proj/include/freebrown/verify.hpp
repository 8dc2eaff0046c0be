#pragma once

// Property suites over random atomic measures: each suite compares two
// independent routes to the same quantity and reports the worst residual.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "freebrown/measures.hpp"
#include "freebrown/semigroup.hpp"
#include "freebrown/transforms.hpp"

namespace freebrown {

struct SuiteResult {
  std::string name;
  double max_residual = 0.0;
  double tolerance = 0.0;
  std::size_t cases = 0;
  double seconds = 0.0;
  bool passed() const { return max_residual < tolerance; }
};

struct RandomMeasureOptions {
  std::size_t max_atoms = 5;
  double atom0_probability = 0.5;  // chance of a nonzero mass at 0
  double max_atom0 = 0.5;
};

/// Up to max_atoms atoms at log-uniform locations in [0.1, 10].
inline PositiveRealMeasure random_atomic_measure(std::mt19937_64& rng, const RandomMeasureOptions& opt = {}) {
  std::uniform_int_distribution<std::size_t> count(1, opt.max_atoms);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const std::size_t n = count(rng);
  const double atom0 = unit(rng) < opt.atom0_probability ? opt.max_atom0 * unit(rng) : 0.0;
  std::vector<Atom> atoms;
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double w = 0.1 + 0.9 * unit(rng);
    atoms.push_back({std::pow(10.0, -1.0 + 2.0 * unit(rng)), w});
    total += w;
  }
  for (Atom& a : atoms) a.w *= (1.0 - atom0) / total;
  if (atom0 > 0.0) atoms.push_back({0.0, atom0});
  return atomic_measure(std::move(atoms));
}

namespace detail {

inline double relative_gap(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

inline double uniform_in(std::mt19937_64& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

inline SuiteResult timed_suite(const std::string& name, double tol, const std::function<void(SuiteResult&)>& body) {
  SuiteResult r;
  r.name = name;
  r.tolerance = tol;
  const auto start = std::chrono::steady_clock::now();
  body(r);
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return r;
}

}  // namespace detail

struct VerifyOptions {
  std::size_t measures = 100;
  std::size_t points_per_measure = 10;
  std::size_t roundtrip_points = 100;
  std::uint64_t seed = 1;
};

/// psi(chi(w)) = w on random w in (delta - 1 + 0.01, -0.01).
inline SuiteResult psi_chi_suite(const VerifyOptions& opt) {
  return detail::timed_suite("psi-chi round trip", 1e-10, [&](SuiteResult& r) {
    std::mt19937_64 rng(opt.seed);
    for (std::size_t m = 0; m < opt.measures; ++m) {
      const PositiveRealMeasure mu = random_atomic_measure(rng);
      for (std::size_t i = 0; i < opt.roundtrip_points; ++i) {
        const double w = detail::uniform_in(rng, mu.atom0() - 1.0 + 0.01, -0.01);
        r.max_residual = std::max(r.max_residual, std::abs(psi(mu, chi(mu, w)) - w));
        ++r.cases;
      }
    }
  });
}

/// S from the R-transform (inverting z R(z)) against S from psi inversion.
inline SuiteResult s_from_r_suite(const VerifyOptions& opt) {
  return detail::timed_suite("S from R vs S from psi", 1e-8, [&](SuiteResult& r) {
    std::mt19937_64 rng(opt.seed + 1);
    for (std::size_t m = 0; m < opt.measures; ++m) {
      const PositiveRealMeasure mu = random_atomic_measure(rng);
      const RTransformTable rt = r_table(mu);
      for (std::size_t i = 0; i < opt.points_per_measure; ++i) {
        const double w = detail::uniform_in(rng, mu.atom0() - 1.0 + 0.01, -0.01);
        const double s = s_transform(mu, w);
        // C^{-1}(w) = w S(w) must lie inside the R domain.
        if (!(w * s > -0.95 * rt.epsilon())) continue;
        r.max_residual = std::max(r.max_residual, detail::relative_gap(s_from_r(rt, w), s));
        ++r.cases;
      }
    }
  });
}

/// w/(1+w) S_nu(w)^2 against the S-transform of the squared pushforward.
inline SuiteResult squaring_suite(const VerifyOptions& opt) {
  return detail::timed_suite("squaring identity", 1e-8, [&](SuiteResult& r) {
    std::mt19937_64 rng(opt.seed + 2);
    for (std::size_t m = 0; m < opt.measures; ++m) {
      const PositiveRealMeasure h = random_atomic_measure(rng);
      const SymmetricRealMeasure nu = symmetrize(h);
      const PositiveRealMeasure sq = pushforward(h, PushforwardMap::square());
      for (std::size_t i = 0; i < opt.points_per_measure; ++i) {
        const double w = detail::uniform_in(rng, h.atom0() - 1.0 + 0.01, -0.01);
        r.max_residual = std::max(r.max_residual, detail::relative_gap(s_of_square(nu, w), s_transform(sq, w)));
        ++r.cases;
      }
    }
  });
}

/// 1 / S_mu(-1 - w) against the S-transform of the inverted pushforward.
inline SuiteResult inversion_suite(const VerifyOptions& opt) {
  return detail::timed_suite("inversion identity", 1e-8, [&](SuiteResult& r) {
    std::mt19937_64 rng(opt.seed + 3);
    RandomMeasureOptions no_atom;
    no_atom.atom0_probability = 0.0;
    for (std::size_t m = 0; m < opt.measures; ++m) {
      const PositiveRealMeasure mu = random_atomic_measure(rng, no_atom);
      const PositiveRealMeasure inv = pushforward(mu, PushforwardMap::inverse());
      for (std::size_t i = 0; i < opt.points_per_measure; ++i) {
        const double w = detail::uniform_in(rng, -0.99, -0.01);
        r.max_residual = std::max(r.max_residual, detail::relative_gap(s_of_inverse(mu, w), s_transform(inv, w)));
        ++r.cases;
      }
    }
  });
}

/// S_{t mu}(w) = S_mu(w) / t.
inline SuiteResult s_scaling_suite(const VerifyOptions& opt) {
  return detail::timed_suite("S scaling", 1e-10, [&](SuiteResult& r) {
    std::mt19937_64 rng(opt.seed + 4);
    for (std::size_t m = 0; m < opt.measures; ++m) {
      const PositiveRealMeasure mu = random_atomic_measure(rng);
      const double t = std::pow(10.0, detail::uniform_in(rng, -1.0, 1.0));
      const PositiveRealMeasure dil = pushforward(mu, PushforwardMap::dilate(t));
      for (std::size_t i = 0; i < opt.points_per_measure; ++i) {
        const double w = detail::uniform_in(rng, mu.atom0() - 1.0 + 0.01, -0.01);
        r.max_residual = std::max(r.max_residual, detail::relative_gap(s_transform(dil, w), s_transform(mu, w) / t));
        ++r.cases;
      }
    }
  });
}

/// R_{t mu}(w) = t R_mu(t w).
inline SuiteResult r_scaling_suite(const VerifyOptions& opt) {
  return detail::timed_suite("R scaling", 1e-10, [&](SuiteResult& r) {
    std::mt19937_64 rng(opt.seed + 5);
    for (std::size_t m = 0; m < opt.measures; ++m) {
      const PositiveRealMeasure mu = random_atomic_measure(rng);
      const double t = std::pow(10.0, detail::uniform_in(rng, -1.0, 1.0));
      const PositiveRealMeasure dil = pushforward(mu, PushforwardMap::dilate(t));
      const RTransformTable base = r_table(mu);
      const RTransformTable scaled = r_table(dil);
      const double eps = std::min(scaled.epsilon(), base.epsilon() / t);
      for (std::size_t i = 0; i < opt.points_per_measure; ++i) {
        const double w = -eps * detail::uniform_in(rng, 0.01, 0.95);
        r.max_residual = std::max(r.max_residual, detail::relative_gap(scaled(w), t * base(t * w)));
        ++r.cases;
      }
    }
  });
}

/// Compressing by s1 then s2 against compressing once by s1 s2, directly and
/// through the nu level.
inline SuiteResult semigroup_suite(const VerifyOptions& opt) {
  return detail::timed_suite("semigroup law", 1e-10, [&](SuiteResult& r) {
    std::mt19937_64 rng(opt.seed + 6);
    for (std::size_t m = 0; m < opt.measures; ++m) {
      const PositiveRealMeasure h2 = random_atomic_measure(rng);
      const double s1 = detail::uniform_in(rng, 1.0, 4.0);
      const double s2 = detail::uniform_in(rng, 1.0, 4.0);
      r.max_residual = std::max(r.max_residual, semigroup_additivity_check(h2, s1, s2, opt.points_per_measure));
      ++r.cases;
    }
  });
}

/// S is strictly decreasing on its domain for non point masses.
inline SuiteResult monotonicity_suite(const VerifyOptions& opt) {
  return detail::timed_suite("S strictly decreasing", 0.5, [&](SuiteResult& r) {
    std::mt19937_64 rng(opt.seed + 7);
    for (std::size_t m = 0; m < opt.measures; ++m) {
      const PositiveRealMeasure mu = random_atomic_measure(rng);
      if (mu.is_point_mass()) continue;
      const std::vector<double> w = chebyshev_nodes(mu.atom0() - 1.0, 0.0, opt.points_per_measure);
      for (std::size_t i = 1; i < w.size(); ++i) {
        // Residual 1 marks a violation; the suite passes when none occur.
        if (!(s_transform(mu, w[i]) < s_transform(mu, w[i - 1]))) r.max_residual = 1.0;
        ++r.cases;
      }
    }
  });
}

inline std::vector<SuiteResult> run_identity_suites(const VerifyOptions& opt) {
  return {psi_chi_suite(opt),   s_from_r_suite(opt),  squaring_suite(opt), inversion_suite(opt),
          s_scaling_suite(opt), r_scaling_suite(opt), semigroup_suite(opt), monotonicity_suite(opt)};
}

}  // namespace freebrown
