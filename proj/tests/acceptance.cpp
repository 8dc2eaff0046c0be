#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <random>
#include <string>

#include <boost/math/quadrature/tanh_sinh.hpp>

#include "freebrown/freebrown.hpp"

using namespace freebrown;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    if (!ok) pass = false;
    if (!detail.empty()) detail += "; ";
    detail += what + (ok ? "" : " [x]");
  }
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

double elapsed(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

Outcome circular_fixed_point() {
  Outcome o;
  const auto start = std::chrono::steady_clock::now();
  const PositiveRealMeasure fp = free_poisson(1.0);
  double worst = 0.0;
  for (double s : {1.0, 2.0, 10.0, 100.0}) {
    const RadialBrownMeasure b = compressed_brown(fp, {s, Scaling::sqrt_s});
    for (std::size_t i = 0; i < b.t_grid().size(); ++i) {
      worst = std::max(worst, std::abs(b.q_values()[i] - std::sqrt(b.t_grid()[i])));
    }
  }
  const double t = elapsed(start);
  o.require(worst <= 1e-8, "max |Q - sqrt t| = " + fmt("%.2e", worst));
  o.require(t < 1.0, "time " + fmt("%.3fs", t));
  return o;
}

Outcome uniform_disk_limit() {
  Outcome o;
  for (double s : {2.0, 10.0, 100.0, 1000.0}) {
    const double gap = disk_convergence_gap(point_mass(1.0), s);
    o.require(gap <= 1.0 / (2.0 * (s - 1.0)) + 1e-9, "s=" + fmt("%g", s) + " gap " + fmt("%.4g", gap));
    if (s == 100.0) o.require(gap < 0.0051, "s=100 below 0.0051");
  }
  return o;
}

Outcome atom_evolution() {
  Outcome o;
  o.require(atom_after_compression(0.5, 1.25) == 0.375, "(0.5,1.25) -> 0.375");
  o.require(atom_after_compression(0.5, 2.0) == 0.0, "(0.5,2) -> 0");
  double worst = 0.0;
  for (double delta : {0.1, 0.3, 0.5, 0.7}) {
    const PositiveRealMeasure mu(delta, {{1.0, 1.0 - delta}});
    for (double s : {1.0, 1.1, 1.25, 1.5, 2.0, 3.0}) {
      const double expected = atom_after_compression(delta, s);
      const STransformTable S = compress_s(s_table(mu), s);
      const RadialBrownMeasure b = compressed_brown(mu, {s, Scaling::sqrt_s});
      worst = std::max({worst, std::abs(S.atom0() - expected), std::abs(S.domain_left() - (expected - 1.0)),
                        std::abs(b.atom0() - expected)});
    }
  }
  o.require(worst <= 1e-10, "domain endpoint mismatch " + fmt("%.2e", worst));
  return o;
}

Outcome stable_pipeline() {
  Outcome o;
  const auto start = std::chrono::steady_clock::now();
  double worst = 0.0;
  for (double beta : {0.0, 0.5, 1.0, 2.0}) {
    const RadialBrownMeasure b = brown_from_s(stable_s_table({beta, 1.0}), 0.0, 512);
    for (std::size_t i = 0; i < b.t_grid().size(); ++i) {
      const double exact = mu_beta_quantile(beta, b.t_grid()[i]);
      worst = std::max(worst, std::abs(b.q_values()[i] - exact) / exact);
    }
  }
  const double t = elapsed(start);
  o.require(worst <= 1e-10, "max relative error " + fmt("%.2e", worst));
  o.require(t < 2.0, "time " + fmt("%.3fs", t));
  return o;
}

Outcome stability() {
  Outcome o;
  double worst = 0.0;
  for (double beta : {0.0, 1.0, 2.0}) {
    for (double s : {1.5, 2.0, 3.0}) worst = std::max(worst, stability_residual(beta, s));
  }
  o.require(worst < 1e-10, "max residual " + fmt("%.2e", worst));
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  double mult = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const double beta = 3.0 * unit(rng), s = 1.0 + 9.0 * unit(rng), t = 1.0 + 9.0 * unit(rng);
    const double lhs = stable_scaling_factor(beta, s * t);
    mult = std::max(mult, std::abs(lhs / (stable_scaling_factor(beta, s) * stable_scaling_factor(beta, t)) - 1.0));
  }
  o.require(mult <= 1e-14, "alpha multiplicativity " + fmt("%.2e", mult));
  return o;
}

Outcome identity_suites() {
  Outcome o;
  const auto start = std::chrono::steady_clock::now();
  for (const SuiteResult& r : run_identity_suites({})) {
    o.require(r.passed(), r.name + " " + fmt("%.1e", r.max_residual));
  }
  const double t = elapsed(start);
  o.require(t < 30.0, "time " + fmt("%.2fs", t));
  return o;
}

Outcome moments() {
  Outcome o;
  boost::math::quadrature::tanh_sinh<double> q;
  const double m0 = mu_beta_abs_moment(0.0, 1.0).value();
  const double m1 = mu_beta_abs_moment(1.0, 1.0).value();
  o.require(m0 == 2.0 / 3.0, "M(0,1) = 2/3");
  o.require(m1 == std::numbers::pi / 2.0, "M(1,1) = pi/2");
  const double oracle0 = q.integrate([](double r) { return 2.0 * r * r; }, 0.0, 1.0);
  const double oracle1 = q.integrate(
      [](double r) { return 2.0 * r * r / std::pow(1.0 + r * r, 2); }, 0.0, std::numeric_limits<double>::infinity());
  o.require(std::abs(m0 - oracle0) <= 1e-8 && std::abs(m1 - oracle1) <= 1e-8,
            "quadrature gap " + fmt("%.1e", std::max(std::abs(m0 - oracle0), std::abs(m1 - oracle1))));
  bool flags = true;
  for (double beta : {0.5, 1.0, 2.0}) {
    for (double k : {0.5, 1.0, 2.0, 4.0, 5.0}) flags &= mu_beta_abs_moment(beta, k).is_infinite() == (beta * k >= 2.0);
  }
  o.require(flags, "divergence flags at beta k >= 2");
  const double nu = nu_beta_moment(1.0, 0.25).value();
  o.require(std::abs(nu - std::sqrt(2.0)) <= 1e-12, "nu_1(1/4) - sqrt2 = " + fmt("%.1e", nu - std::sqrt(2.0)));
  for (double beta : {0.5, 1.0, 2.0}) {
    const double r = 1e3, h = 1e-3;
    const double slope = (std::log(mu_beta_radial_density(beta, r * std::exp(h)).planar) -
                          std::log(mu_beta_radial_density(beta, r * std::exp(-h)).planar)) /
                         (2.0 * h);
    const double expected = -(2.0 + 2.0 / beta);
    o.require(std::abs(slope / expected - 1.0) <= 0.01, "tail slope beta=" + fmt("%g", beta) + " " + fmt("%.4f", slope));
  }
  return o;
}

struct McRun {
  bool pass;
  std::string detail;
};

McRun with_retry(const std::string& name, std::uint64_t seed, const std::function<McRun(std::uint64_t)>& run) {
  McRun first = run(seed);
  if (first.pass) return {true, name + " " + first.detail};
  const std::uint64_t second = seed + 1000;
  McRun retry = run(second);
  return {retry.pass, name + " " + first.detail + " then seed " + std::to_string(second) + " " + retry.detail};
}

Outcome monte_carlo() {
  Outcome o;
  auto add = [&o](const McRun& r) { o.require(r.pass, r.detail); };

  add(with_retry("truncated-haar", 1, [](std::uint64_t seed) {
    const RadialBrownMeasure pred = compressed_brown(point_mass(1.0), {2.0, Scaling::sqrt_s});
    EnsembleSpec spec = EnsembleSpec::truncated_haar(1024, 512);
    spec.with_trials(20).with_seed(seed);
    const ExperimentReport r = run_experiment(spec, pred, std::sqrt(2.0));
    return McRun{r.ks < 0.05 && r.wall_time_s < 300.0, "ks " + fmt("%.4f", r.ks) + " " + fmt("%.1fs", r.wall_time_s)};
  }));

  add(with_retry("ginibre", 2, [](std::uint64_t seed) {
    const RadialBrownMeasure disk = brown_from_s(stable_s_table({0.0, 1.0}), 0.0);
    EnsembleSpec spec = EnsembleSpec::ginibre(1024);
    spec.with_trials(4).with_seed(seed);
    const ExperimentReport r = run_experiment(spec, disk, 1.0);
    return McRun{r.ks < 0.05, "ks " + fmt("%.4f", r.ks)};
  }));

  add(with_retry("product", 3, [](std::uint64_t seed) {
    const RadialBrownMeasure mu1 = brown_from_s(stable_s_table({1.0, 1.0}), 0.0);
    EnsembleSpec spec = EnsembleSpec::ginibre_product(512, 1);
    spec.with_trials(10).with_seed(seed);
    const ExperimentReport r = run_experiment(spec, mu1, 1.0);
    return McRun{r.ks < 0.05, "ks " + fmt("%.4f", r.ks)};
  }));

  add(with_retry("free-sum", 4, [](std::uint64_t seed) {
    const ExperimentReport r = free_sum_check(1, 512, 10, seed);
    return McRun{r.ks < 0.06, "ks " + fmt("%.4f", r.ks)};
  }));

  add(with_retry("singular-moment", 6, [](std::uint64_t seed) {
    const MomentCheck m = singular_moment_check(1, 0.25, 512, 20, seed);
    return McRun{m.relative_error < 0.05, "rel " + fmt("%.2e", m.relative_error)};
  }));
  return o;
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"circular fixed point", circular_fixed_point},
      {"uniform disk limit", uniform_disk_limit},
      {"atom evolution", atom_evolution},
      {"stable pipeline", stable_pipeline},
      {"stability residual", stability},
      {"identity suites", identity_suites},
      {"moments and tails", moments},
      {"monte carlo", monte_carlo},
  };
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("exception: ") + e.what();
    }
    if (!o.pass) ++failures;
    std::printf("%s %zu %s (%.2fs): %s\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first.c_str(),
                elapsed(start), o.detail.c_str());
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
