#include <sys/wait.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <gtest/gtest.h>

#include "freebrown/io.hpp"

namespace fs = std::filesystem;
using freebrown::json;

namespace {

struct CliRun {
  int status;
  std::string out;
};

CliRun run(const std::string& args, const std::string& env = "") {
  const std::string cmd = env + " " + FREEBROWN_CLI + " " + args + " 2>/dev/null";
  FILE* pipe = popen(cmd.c_str(), "r");
  std::string out;
  char buf[4096];
  while (std::size_t n = std::fread(buf, 1, sizeof buf, pipe)) out.append(buf, n);
  const int status = pclose(pipe);
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, out};
}

std::string data(const std::string& name) { return std::string(FREEBROWN_EXAMPLES) + "/" + name; }

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "freebrown_cli_test";
  fs::create_directories(dir);
  return dir / name;
}

}  // namespace

TEST(Cli, Version) {
  const CliRun r = run("--version");
  EXPECT_EQ(r.status, 0);
  EXPECT_NE(r.out.find("freebrown 0.1.0"), std::string::npos);
}

TEST(Cli, VerifyQuickPasses) {
  const CliRun r = run("verify --quick");
  EXPECT_EQ(r.status, 0) << r.out;
  EXPECT_EQ(r.out.find("FAIL"), std::string::npos) << r.out;
  EXPECT_NE(r.out.find("PASS"), std::string::npos);
}

TEST(Cli, CompressHaarRowAtHalf) {
  const CliRun r = run("compress --measure " + data("haar.json") + " --s 2 --scaling sqrt-s --grid 513");
  EXPECT_EQ(r.status, 0);
  EXPECT_EQ(r.out.substr(0, 4), "t,r\n");
  EXPECT_NE(r.out.find("\n0.5,0.816496580928\n"), std::string::npos);
}

TEST(Cli, CompressWritesSidecar) {
  const fs::path csv = scratch("haar.csv");
  const CliRun r = run("compress --measure " + data("haar.json") + " --s 4 --out " + csv.string());
  ASSERT_EQ(r.status, 0);
  const json meta = json::parse(slurp(scratch("haar.json")));
  EXPECT_EQ(meta.at("delta_s"), 0.0);
  EXPECT_EQ(meta.at("scaling"), "sqrt-s");
  EXPECT_NEAR(meta.at("r_max").get<double>(), 1.0, 1e-14);
  EXPECT_LE(meta.at("gap_to_disk").get<double>(), 1.0 / 6.0);
  EXPECT_EQ(meta.at("config").at("command"), "compress");
  EXPECT_EQ(meta.at("config").at("grid"), 512);
}

TEST(Cli, StableMoments) {
  const CliRun r = run("stable --beta 1 --moments 1,2 --nu-moments 0.25");
  EXPECT_EQ(r.status, 0);
  const json j = json::parse(r.out);
  EXPECT_NEAR(j.at("abs_moments").at("1").get<double>(), 1.5707963267948966, 1e-15);
  EXPECT_EQ(j.at("abs_moments").at("2"), "inf");
  EXPECT_NEAR(j.at("nu_moments").at("0.25").get<double>(), std::sqrt(2.0), 1e-12);
  EXPECT_NE(r.out.find("1.5707963"), std::string::npos);
}

TEST(Cli, StableQuantileFile) {
  const fs::path csv = scratch("mu1.csv");
  ASSERT_EQ(run("stable --beta 1 --grid 513 --out " + csv.string()).status, 0);
  EXPECT_NE(slurp(csv).find("\n0.5,1\n"), std::string::npos);
  EXPECT_EQ(json::parse(slurp(scratch("mu1.json"))).at("beta"), 1.0);
}

TEST(Cli, TransformRows) {
  const CliRun r = run("transform --measure " + data("two_atoms.json") + " --which s --at -0.5 --at -0.2");
  EXPECT_EQ(r.status, 0);
  EXPECT_EQ(r.out.substr(0, 8), "w,value\n");
  EXPECT_NE(r.out.find("-0.5,0.5\n"), std::string::npos) << r.out;
  const CliRun c = run("transform --measure " + data("circular.json") + " --which cauchy --at -1");
  EXPECT_NE(c.out.find("-1,-0.618033988749895"), std::string::npos) << c.out;
}

TEST(Cli, ExitCodes) {
  EXPECT_EQ(run("transform --measure " + data("haar.json") + " --which s --at -0.5 --bogus").status, 2);
  EXPECT_EQ(run("transform --measure " + data("bernoulli.json") + " --which chi --at -0.7").status, 2);
  EXPECT_EQ(run("compress --measure " + data("haar.json") + " --s 0.5").status, 2);
  EXPECT_EQ(run("rmt moments --n 16 --gamma 0.6").status, 2);
  EXPECT_EQ(run("stable --beta 1", "FREEBROWN_SEED=abc").status, 2);
  EXPECT_EQ(run("").status, 2);
  const fs::path bad = scratch("bad.json");
  std::ofstream(bad) << R"({"atoms": [{"x": 1.0, "w": 0.4}]})";
  EXPECT_EQ(run("compress --measure " + bad.string() + " --s 2").status, 2);
}

TEST(Cli, RmtIsHashStable) {
  const fs::path a = scratch("a.json");
  const std::string args = "rmt free-sum --n 64 --k 1 --trials 2 --omit-timing --out " + a.string();
  ASSERT_EQ(run(args, "FREEBROWN_SEED=77").status, 0);
  const std::string first = slurp(a);
  ASSERT_EQ(run(args, "FREEBROWN_SEED=77").status, 0);
  EXPECT_EQ(slurp(a), first);
  const json j = json::parse(slurp(a));
  EXPECT_EQ(j.at("config").at("seed"), 77);
  EXPECT_TRUE(j.at("wall_time_s").is_null());
  EXPECT_EQ(j.at("radii_quantiles").size(), 19u);
  EXPECT_EQ(j.at("spec").at("kind"), "free_sum");
}

TEST(Cli, RmtSeedFlagWins) {
  const CliRun r = run("rmt ginibre --n 16 --seed 5", "FREEBROWN_SEED=77");
  ASSERT_EQ(r.status, 0);
  const json j = json::parse(r.out);
  EXPECT_EQ(j.at("spec").at("seed"), 5);
  EXPECT_GE(j.at("ks").get<double>(), 0.0);
  EXPECT_TRUE(j.at("wall_time_s").is_number());
}

TEST(Cli, RmtTruncatedAndMoments) {
  const CliRun t = run("rmt truncated-haar --n 64 --s 2 --trials 2");
  ASSERT_EQ(t.status, 0);
  EXPECT_EQ(json::parse(t.out).at("spec").at("m"), 32);
  const CliRun m = run("rmt moments --n 32 --k 1 --gamma 0.25 --trials 2");
  ASSERT_EQ(m.status, 0);
  const json j = json::parse(m.out);
  EXPECT_NEAR(j.at("predicted").get<double>(), std::sqrt(2.0), 1e-12);
  EXPECT_FALSE(j.at("near_divergent").get<bool>());
}
