#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include "ocap/config.hpp"
#include "ocap/run.hpp"

using namespace ocap;
namespace fs = std::filesystem;

namespace {

IniSections ini(const std::string& text) {
  std::istringstream in(text);
  return parse_ini(in);
}

fs::path scratch(const std::string& name) {
  fs::path p = fs::temp_directory_path() / ("ocap_cli_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

int run_cli(const std::string& args) {
  std::string cmd = std::string(OCAP_CLI_PATH) + " " + args + " >/dev/null 2>&1";
  int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

void write(const fs::path& p, const std::string& text) { std::ofstream(p) << text; }

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return std::string(std::istreambuf_iterator<char>(in), {});
}

nlohmann::json load(const fs::path& p) { return nlohmann::json::parse(slurp(p)); }

}  // namespace

TEST(Ini, ParsesSectionsCommentsAndWhitespace) {
  auto s = ini("# header\n[young]\nfamily = power_log ; trailing\n  p=2\n\n[domain]\nresolution = 64\n");
  EXPECT_EQ(s.at("young").at("family"), "power_log");
  EXPECT_EQ(s.at("young").at("p"), "2");
  EXPECT_EQ(s.at("domain").at("resolution"), "64");
}

TEST(Ini, RejectsMalformedInput) {
  EXPECT_THROW(ini("[young\n"), ConfigError);
  EXPECT_THROW(ini("p = 2\n"), ConfigError);
  EXPECT_THROW(ini("[young]\np\n"), ConfigError);
  EXPECT_THROW(ini("[young]\np = 2\np = 3\n"), ConfigError);
  EXPECT_THROW(ini("[young]\n[young]\n"), ConfigError);
  EXPECT_THROW(parse_ini_file("/nonexistent/run.ini"), IoError);
}

TEST(Resolve, DefaultsAndOverrides) {
  auto c = resolve_config(ini("[young]\nfamily = power_log\np = 2\ntheta = 1\n"), "capacity");
  EXPECT_EQ(c.young.build().family(), Family::power_log);
  EXPECT_EQ(c.n, 2);
  EXPECT_EQ(c.resolution, 128);
  auto d = resolve_config(ini("[young]\n[domain]\nn = 3\n[capacity]\ncenter = 0, 0, 0\n"), "capacity");
  EXPECT_EQ(d.resolution, 48);
  auto j = c.to_json();
  EXPECT_TRUE(j.contains("young"));
}

TEST(Resolve, RejectsUnknownOrInvalid) {
  EXPECT_THROW(resolve_config({}, "capacity"), ConfigError);
  EXPECT_THROW(resolve_config(ini("[domain]\nn = 2\n"), "capacity"), ConfigError);
  EXPECT_THROW(resolve_config(ini("[young]\n[bogus]\n"), "capacity"), ConfigError);
  EXPECT_THROW(resolve_config(ini("[young]\ncolour = red\n"), "capacity"), ConfigError);
  EXPECT_THROW(resolve_config(ini("[young]\np = two\n"), "capacity"), ConfigError);
  EXPECT_THROW(resolve_config(ini("[young]\n"), "integrate"), ConfigError);
  EXPECT_THROW(resolve_config(ini("[young]\n[capacity]\nmethod = magic\n"), "capacity"), ConfigError);
  EXPECT_THROW(resolve_config(ini("[young]\n[strong-type]\nlambdas = 1, -2\n"), "strong-type"), ConfigError);
  EXPECT_THROW(resolve_config(ini("[young]\n[capacity]\ncenter = 0, 0, 0\n"), "capacity"), ConfigError);
}

TEST(Cli, EmptyConfigIsConfigErrorWithoutFiles) {
  auto dir = scratch("empty");
  write(dir / "empty.ini", "");
  EXPECT_EQ(run_cli("capacity --config " + (dir / "empty.ini").string() + " --out " + (dir / "out").string()), 2);
  EXPECT_FALSE(fs::exists(dir / "out"));
}

TEST(Cli, BadArgumentsAreConfigErrors) {
  EXPECT_EQ(run_cli("capacity"), 2);
  EXPECT_EQ(run_cli("frobnicate --config x.ini"), 2);
}

TEST(Cli, MissingConfigIsIoError) { EXPECT_EQ(run_cli("capacity --config /nonexistent/run.ini"), 4); }

TEST(Cli, UnwritableOutputIsIoError) {
  auto dir = scratch("unwritable");
  write(dir / "run.ini", "[young]\nfamily = power\np = 2\n[domain]\nresolution = 64\n");
  write(dir / "blocker", "not a directory");
  EXPECT_EQ(run_cli("capacity --config " + (dir / "run.ini").string() + " --out " + (dir / "blocker" / "o").string()), 4);
}

TEST(Cli, CapacityMatchesLogFormula) {
  auto dir = scratch("capacity");
  write(dir / "run.ini",
        "[young]\nfamily = power\np = 2\n[domain]\nresolution = 128\n[capacity]\nradius = 0.25\nradial_oracle = true\n");
  ASSERT_EQ(run_cli("capacity --config " + (dir / "run.ini").string() + " --out " + (dir / "out").string()), 0);
  auto j = load(dir / "out" / "capacity.json");
  double ref = 2 * std::numbers::pi / std::log(4.0);
  EXPECT_NEAR(j["variational"]["value"].get<double>(), ref, 0.05 * ref);
  EXPECT_NEAR(j["radial_oracle"]["value"].get<double>(), ref, 1e-6 * ref);
  auto m = load(dir / "out" / "manifest.json");
  EXPECT_EQ(m["config"]["scenario"], "capacity");
}

TEST(Cli, CheckConditionsAllPassForExampleFamily) {
  auto dir = scratch("conditions");
  write(dir / "run.ini", "[young]\nfamily = exp_loglog\np = 2\ntheta = 1\ngamma = 0\n");
  ASSERT_EQ(run_cli("check-conditions --config " + (dir / "run.ini").string() + " --out " + (dir / "out").string()), 0);
  auto j = load(dir / "out" / "conditions.json");
  EXPECT_EQ(j["reports"].size(), 4u);
  EXPECT_TRUE(j["all_pass"].get<bool>());
}

TEST(Cli, NonConvergenceExitCode) {
  auto dir = scratch("nonconv");
  write(dir / "run.ini",
        "[young]\nfamily = power_log\np = 2\ntheta = 1\n[domain]\nresolution = 64\n[solver]\nmax_iterations = 1\n");
  EXPECT_EQ(run_cli("capacity --config " + (dir / "run.ini").string() + " --out " + (dir / "out").string()), 3);
  auto j = load(dir / "out" / "capacity.json");
  EXPECT_FALSE(j["converged"].get<bool>());
}

TEST(Cli, RerunsAreByteIdentical) {
  auto dir = scratch("rerun");
  write(dir / "run.ini",
        "[young]\nfamily = power\np = 2\n[domain]\nresolution = 64\n[strong-type]\nsuite = tent, random_smooth\n"
        "lambdas = 0.5, 1\n");
  const char* files[] = {"manifest.json", "strong_type.json", "strong_type_levels.csv"};
  std::vector<std::string> first;
  for (int pass = 0; pass < 2; ++pass) {
    ASSERT_EQ(run_cli("strong-type --threads 3 --seed 11 --config " + (dir / "run.ini").string() + " --out " +
                      (dir / "out").string()),
              0);
    for (std::size_t k = 0; k < std::size(files); ++k) {
      fs::path f = dir / "out" / files[k];
      if (pass == 0) {
        first.push_back(slurp(f));
        fs::remove(f);
      } else {
        EXPECT_EQ(first[k], slurp(f)) << files[k];
      }
    }
  }
  EXPECT_NE(slurp(dir / "out" / "strong_type_levels.csv").find("random_smooth_11"), std::string::npos);
}
