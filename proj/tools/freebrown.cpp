// freebrown command line: transforms, compressions, the stable family,
// random matrix experiments and the identity self test.
//
// Exit status: 0 success, 2 invalid input, 3 numerical failure.

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <iostream>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "freebrown/freebrown.hpp"

using namespace freebrown;

namespace {

constexpr int kExitInput = 2;
constexpr int kExitNumeric = 3;
constexpr std::uint64_t kDefaultSeed = 1;

struct Common {
  std::vector<std::string> argv;
  std::optional<std::uint64_t> seed;
  std::string out;
};

std::uint64_t resolve_seed(const std::optional<std::uint64_t>& flag) {
  if (flag) return *flag;
  if (const char* env = std::getenv("FREEBROWN_SEED"); env != nullptr && *env != '\0') {
    try {
      std::size_t used = 0;
      const unsigned long long v = std::stoull(env, &used);
      if (used != std::string(env).size()) throw std::invalid_argument(env);
      return v;
    } catch (const std::exception&) {
      throw Error(ErrorCode::Validation, std::string("FREEBROWN_SEED is not an unsigned integer: ") + env);
    }
  }
  return kDefaultSeed;
}

json run_config(const Common& c, const std::string& command, std::uint64_t seed, std::size_t grid) {
  std::vector<std::string> args(c.argv.begin() + 1, c.argv.end());
  return {{"command", command},
          {"args", args},
          {"seed", seed},
          {"grid", grid},
          {"tolerances", {{"root", 1e-12}, {"identity", 1e-8}}},
          {"version", FREEBROWN_VERSION}};
}

void emit_csv(const std::string& out, const std::string& csv, const json& meta) {
  if (out.empty()) {
    std::cout << csv;
    return;
  }
  write_text_file(out, csv);
  write_json_file(sidecar_path(out), meta);
}

void emit_json(const std::string& out, const json& j) {
  if (out.empty()) {
    std::cout << j.dump(2) << '\n';
  } else {
    write_json_file(out, j);
  }
}

// ---------------------------------------------------------------- transform

struct TransformArgs {
  std::string measure;
  std::string which;
  std::vector<double> at;
};

double evaluate_transform(const PositiveRealMeasure& mu, const std::string& which, double w) {
  if (which == "cauchy") return cauchy(mu, w);
  if (which == "psi") return psi(mu, w);
  if (which == "chi") return chi(mu, w);
  if (which == "s") return s_table(mu)(w);
  if (which == "r") return r_transform(mu, w);
  if (which == "s-from-r") return s_from_r(mu, w);
  throw Error(ErrorCode::Validation, "unknown transform " + which);
}

void run_transform(const Common& c, const TransformArgs& a) {
  const PositiveRealMeasure mu = read_measure(a.measure);
  std::string csv = "w,value\n";
  char buf[96];
  for (double w : a.at) {
    std::snprintf(buf, sizeof buf, "%.15g,%.15g\n", w, evaluate_transform(mu, a.which, w));
    csv += buf;
  }
  json meta = {{"config", run_config(c, "transform", resolve_seed(c.seed), 0)}, {"which", a.which}};
  emit_csv(c.out, csv, meta);
}

// ----------------------------------------------------------------- compress

struct CompressArgs {
  std::string measure;
  double s = 1.0;
  std::string scaling = "sqrt-s";
  std::size_t grid = kDefaultQuantileNodes;
};

Scaling parse_scaling(const std::string& s) {
  if (s == "none") return Scaling::none;
  if (s == "sqrt-s") return Scaling::sqrt_s;
  if (s == "s") return Scaling::s;
  throw Error(ErrorCode::Validation, "unknown scaling " + s);
}

void run_compress(const Common& c, const CompressArgs& a) {
  const PositiveRealMeasure h2 = read_measure(a.measure);
  const CompressionParams p{a.s, parse_scaling(a.scaling)};
  p.validate();
  const RadialBrownMeasure b = compressed_brown(h2, p, a.grid);
  json gap = nullptr;
  const ExtendedReal m1 = moment(h2, 1.0);
  if (m1.is_finite() && std::abs(m1.value() - 1.0) <= 1e-6) gap = disk_convergence_gap(h2, a.s, a.grid);
  json meta = {{"config", run_config(c, "compress", resolve_seed(c.seed), a.grid)},
               {"s", a.s},
               {"scaling", to_string(p.scaling)},
               {"delta_s", atom_after_compression(h2.atom0(), a.s)},
               {"r_min", b.r_min()},
               {"r_max", radius_to_json(b.r_max())},
               {"unbounded", b.unbounded()},
               {"gap_to_disk", gap}};
  emit_csv(c.out, quantile_csv(b), meta);
}

// ------------------------------------------------------------------- stable

struct StableArgs {
  double beta = 0.0;
  double c = 1.0;
  std::size_t grid = kDefaultQuantileNodes;
  std::vector<double> moments;
  std::vector<double> nu_moments;
};

void run_stable(const Common& c, const StableArgs& a) {
  const StableParams p{a.beta, a.c};
  p.validate();
  // S = c (-z)^beta / (1 + z) describes mu_beta with radii scaled by c^{-1/2}.
  json abs = json::object();
  for (double k : a.moments) {
    const ExtendedReal m = mu_beta_abs_moment(a.beta, k);
    abs[format_g12(k)] = to_json(m.is_finite() ? ExtendedReal::finite(m.value() * std::pow(a.c, -0.5 * k)) : m);
  }
  json nu = json::object();
  for (double g : a.nu_moments) {
    const ExtendedReal m = nu_beta_moment(a.beta, g);
    nu[format_g12(g)] = to_json(m.is_finite() ? ExtendedReal::finite(m.value() * std::pow(a.c, -g)) : m);
  }
  json meta = {{"config", run_config(c, "stable", resolve_seed(c.seed), a.grid)},
               {"beta", a.beta},
               {"c", a.c},
               {"abs_moments", abs},
               {"nu_moments", nu}};
  if (c.out.empty()) {
    emit_json("", meta);
    return;
  }
  const RadialBrownMeasure b = brown_from_s(stable_s_table(p), 0.0, a.grid);
  emit_csv(c.out, quantile_csv(b), meta);
}

// ---------------------------------------------------------------------- rmt

struct RmtArgs {
  std::size_t n = 0;
  double s = 2.0;
  int k = 1;
  double gamma = 0.25;
  std::size_t trials = 1;
  std::size_t parallel = 1;
  std::size_t grid = kDefaultQuantileNodes;
  bool omit_timing = false;
};

json spec_to_json(const EnsembleSpec& spec) {
  json j = {{"kind", to_string(spec.kind)}, {"n", spec.n}, {"trials", spec.trials}, {"seed", spec.seed}};
  if (spec.kind == EnsembleKind::truncated_haar) j["m"] = spec.m;
  if (spec.kind == EnsembleKind::ginibre_product) j["k"] = spec.k;
  if (spec.kind == EnsembleKind::free_sum) {
    j["parts"] = json::array();
    for (const EnsembleSpec& p : spec.parts) j["parts"].push_back(spec_to_json(p));
  }
  return j;
}

json report_to_json(const ExperimentReport& r, const RadialBrownMeasure& predicted, bool omit_timing) {
  std::vector<double> levels, empirical, expected;
  const std::size_t n = r.scaled_radii.size();
  for (int i = 1; i < 20; ++i) {
    const double p = 0.05 * i;
    levels.push_back(p);
    const auto idx = std::min(n - 1, static_cast<std::size_t>(std::floor(p * static_cast<double>(n))));
    empirical.push_back(r.scaled_radii[idx]);
    expected.push_back(predicted.quantile(p));
  }
  json wall = nullptr;
  if (!omit_timing) wall = r.wall_time_s;
  return {{"spec", spec_to_json(r.spec)},
          {"predicted", r.predicted_ref},
          {"scaling", r.scaling},
          {"ks", r.ks},
          {"n_resamples", r.n_resamples},
          {"n_eigenvalues", n},
          {"quantile_levels", levels},
          {"radii_quantiles", empirical},
          {"predicted_quantiles", expected},
          {"wall_time_s", wall}};
}

void run_rmt(const Common& c, const std::string& kind, const RmtArgs& a) {
  const std::uint64_t seed = resolve_seed(c.seed);
  if (a.n < 1) throw Error(ErrorCode::Validation, "--n must be >= 1");
  if (a.trials < 1) throw Error(ErrorCode::Validation, "--trials must be >= 1");
  if (a.parallel < 1) throw Error(ErrorCode::Validation, "--parallel must be >= 1");
  if (a.k < 0) throw Error(ErrorCode::Validation, "--k must be >= 0");
  json out;
  if (kind == "moments") {
    const MomentCheck m = singular_moment_check(a.k, a.gamma, a.n, a.trials, seed, a.parallel);
    out = {{"spec", {{"kind", "ginibre_product"}, {"n", a.n}, {"k", a.k}, {"trials", a.trials}, {"seed", seed}}},
           {"gamma", a.gamma},
           {"empirical", m.empirical},
           {"standard_error", m.standard_error},
           {"predicted", to_json(m.predicted)},
           {"relative_error", m.relative_error},
           {"near_divergent", m.near_divergent},
           {"n_resamples", m.n_resamples}};
  } else {
    std::optional<ExperimentReport> report;
    std::optional<RadialBrownMeasure> predicted;
    if (kind == "truncated-haar") {
      if (!(a.s >= 1.0)) throw Error(ErrorCode::Validation, "--s must be >= 1");
      const auto m = static_cast<std::size_t>(std::llround(static_cast<double>(a.n) / a.s));
      if (m < 1) throw Error(ErrorCode::Validation, "n / s rounds to an empty truncation");
      const double s_eff = static_cast<double>(a.n) / static_cast<double>(m);
      predicted = compressed_brown(point_mass(1.0), {s_eff, Scaling::sqrt_s}, a.grid);
      EnsembleSpec spec = EnsembleSpec::truncated_haar(a.n, m);
      spec.with_trials(a.trials).with_seed(seed);
      report = run_experiment(spec, *predicted, std::sqrt(s_eff), "haar compressed s=" + format_g12(s_eff), a.parallel);
    } else if (kind == "ginibre") {
      predicted = brown_from_s(stable_s_table({0.0, 1.0}), 0.0, a.grid);
      EnsembleSpec spec = EnsembleSpec::ginibre(a.n);
      spec.with_trials(a.trials).with_seed(seed);
      report = run_experiment(spec, *predicted, 1.0, "mu_0", a.parallel);
    } else if (kind == "product") {
      predicted = brown_from_s(stable_s_table({static_cast<double>(a.k), 1.0}), 0.0, a.grid);
      EnsembleSpec spec = EnsembleSpec::ginibre_product(a.n, a.k);
      spec.with_trials(a.trials).with_seed(seed);
      report = run_experiment(spec, *predicted, 1.0, "mu_" + std::to_string(a.k), a.parallel);
    } else if (kind == "free-sum") {
      predicted = brown_from_s(stable_s_table({static_cast<double>(a.k), 1.0}), 0.0, a.grid);
      report = free_sum_check(a.k, a.n, a.trials, seed, a.parallel, a.grid);
    } else {
      throw Error(ErrorCode::Validation, "unknown rmt experiment " + kind);
    }
    out = report_to_json(*report, *predicted, a.omit_timing);
  }
  out["config"] = run_config(c, "rmt " + kind, seed, a.grid);
  emit_json(c.out, out);
}

// ------------------------------------------------------------------- verify

int run_verify(const Common& c, bool quick) {
  VerifyOptions opt;
  opt.seed = resolve_seed(c.seed);
  if (quick) opt.measures = 20;
  const std::vector<SuiteResult> results = run_identity_suites(opt);
  bool ok = true;
  std::printf("%-26s %12s %10s %7s  %s\n", "suite", "max_residual", "tolerance", "cases", "result");
  json rows = json::array();
  for (const SuiteResult& r : results) {
    std::printf("%-26s %12.3e %10.0e %7zu  %s\n", r.name.c_str(), r.max_residual, r.tolerance, r.cases,
                r.passed() ? "PASS" : "FAIL");
    ok = ok && r.passed();
    rows.push_back({{"suite", r.name},
                    {"max_residual", r.max_residual},
                    {"tolerance", r.tolerance},
                    {"cases", r.cases},
                    {"passed", r.passed()}});
  }
  if (!c.out.empty()) {
    write_json_file(c.out, {{"config", run_config(c, "verify", opt.seed, 0)}, {"suites", rows}, {"passed", ok}});
  }
  return ok ? 0 : kExitNumeric;
}

}  // namespace

int main(int argc, char** argv) {
  Common common;
  common.argv.assign(argv, argv + argc);

  CLI::App app{"Brown measures of R-diagonal elements, free compression and random matrix checks"};
  app.set_version_flag("--version", std::string("freebrown ") + FREEBROWN_VERSION);
  app.require_subcommand(1);

  auto add_seed = [&common](CLI::App* sub) {
    sub->add_option("--seed", common.seed, "master seed (falls back to FREEBROWN_SEED)");
  };

  TransformArgs ta;
  CLI::App* transform = app.add_subcommand("transform", "evaluate a transform of a measure on the negative axis");
  transform->add_option("--measure", ta.measure, "measure JSON")->required()->check(CLI::ExistingFile);
  transform->add_option("--which", ta.which, "transform")
      ->required()
      ->check(CLI::IsMember({"cauchy", "psi", "chi", "s", "r", "s-from-r"}));
  transform->add_option("--at", ta.at, "evaluation point (repeatable)")->required();
  transform->add_option("--out", common.out, "CSV output path (stdout when omitted)");
  add_seed(transform);

  CompressArgs ca;
  CLI::App* compress = app.add_subcommand("compress", "Brown measure of the free compression of u h");
  compress->add_option("--measure", ca.measure, "law of h^2 as JSON")->required()->check(CLI::ExistingFile);
  compress->add_option("--s", ca.s, "compression time s >= 1")->required();
  compress->add_option("--scaling", ca.scaling, "normalization")
      ->check(CLI::IsMember({"none", "sqrt-s", "s"}))
      ->capture_default_str();
  compress->add_option("--grid", ca.grid, "quantile nodes")->check(CLI::Range(2, 1 << 20))->capture_default_str();
  compress->add_option("--out", common.out, "CSV output path (stdout when omitted)");
  add_seed(compress);

  StableArgs sa;
  CLI::App* stable = app.add_subcommand("stable", "quantiles and moments of the stable family mu_beta");
  stable->add_option("--beta", sa.beta, "beta >= 0")->required();
  stable->add_option("--c", sa.c, "scale c > 0")->capture_default_str();
  stable->add_option("--grid", sa.grid, "quantile nodes")->check(CLI::Range(2, 1 << 20))->capture_default_str();
  stable->add_option("--moments", sa.moments, "orders k of E|Z|^k")->delimiter(',');
  stable->add_option("--nu-moments", sa.nu_moments, "orders gamma of the nu_beta moments")->delimiter(',');
  stable->add_option("--out", common.out, "CSV output path; the JSON goes next to it (stdout when omitted)");
  add_seed(stable);

  RmtArgs ra;
  std::string rmt_kind;
  CLI::App* rmt = app.add_subcommand("rmt", "random matrix Monte Carlo against the predicted Brown measure");
  rmt->add_option("experiment", rmt_kind, "experiment")
      ->required()
      ->check(CLI::IsMember({"truncated-haar", "ginibre", "product", "free-sum", "moments"}));
  rmt->add_option("--n", ra.n, "matrix size")->required();
  rmt->add_option("--s", ra.s, "compression time for truncated-haar (m = round(n/s))")->capture_default_str();
  rmt->add_option("--k", ra.k, "inverse power for product, free-sum and moments")->capture_default_str();
  rmt->add_option("--gamma", ra.gamma, "moment order for moments")->capture_default_str();
  rmt->add_option("--trials", ra.trials, "independent samples")->capture_default_str();
  rmt->add_option("--parallel", ra.parallel, "worker threads")->capture_default_str();
  rmt->add_option("--grid", ra.grid, "quantile nodes of the prediction")
      ->check(CLI::Range(2, 1 << 20))
      ->capture_default_str();
  rmt->add_flag("--omit-timing", ra.omit_timing, "write wall_time_s as null for byte-stable reports");
  rmt->add_option("--out", common.out, "JSON report path (stdout when omitted)");
  add_seed(rmt);

  bool quick = false;
  CLI::App* verify = app.add_subcommand("verify", "run the identity suites and print a pass/fail table");
  verify->add_flag("--quick", quick, "20 random measures per suite instead of 100");
  verify->add_option("--out", common.out, "JSON summary path");
  add_seed(verify);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    std::cerr << "freebrown: " << e.what() << '\n';
    return kExitInput;
  }

  try {
    if (transform->parsed()) run_transform(common, ta);
    if (compress->parsed()) run_compress(common, ca);
    if (stable->parsed()) run_stable(common, sa);
    if (rmt->parsed()) run_rmt(common, rmt_kind, ra);
    if (verify->parsed()) return run_verify(common, quick);
  } catch (const Error& e) {
    std::cerr << "freebrown: " << to_string(e.code()) << ": " << e.what() << '\n';
    return is_input_error(e.code()) ? kExitInput : kExitNumeric;
  } catch (const std::exception& e) {
    std::cerr << "freebrown: " << e.what() << '\n';
    return kExitNumeric;
  }
  return 0;
}
