#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "doctest.h"
#include "qgauge/scenario.hpp"

using namespace qgauge;
namespace fs = std::filesystem;

namespace {

std::string fresh_dir(const std::string& tag) {
  fs::path p = fs::temp_directory_path() / ("qgauge_test_" + tag);
  fs::remove_all(p);
  fs::create_directories(p);
  return p.string();
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

const char* kSmallConfig = R"({
  "system": {
    "basis": "oscillator",
    "n_max": 24,
    "omega": 1.0,
    "particles": 1,
    "statistics": "distinguishable",
    "potential": {"kind": "harmonic", "omega": 1.0}
  },
  "ensemble": {"kind": "canonical", "beta": [1.0]},
  "checks": [
    {"rule": "force_balance", "stride": 8},
    {"rule": "hyperforce", "observable": {"name": "random_hermitian", "seed": 3},
     "stride": 8},
    {"rule": "boltzmann_factor", "stride": 8},
    {"rule": "anti_self_adjoint", "observable": {"name": "sum_x"}, "stride": 8}
  ],
  "output": {"directory": "out"}
})";

}  // namespace

TEST_CASE("the rule registry names every check once") {
  const std::vector<RuleInfo>& rules = rule_registry();
  CHECK(rules.size() >= 19);
  for (const RuleInfo& r : rules) {
    CHECK(!r.id.empty());
    CHECK(r.tolerance > 0.0);
    CHECK(!r.summary.empty());
    CHECK(find_rule(r.id) != nullptr);
  }
  CHECK(find_rule("force_balance")->tolerance == 1e-10);
  CHECK(find_rule("force_balance")->rule_class == RuleClass::exact_identity);
  CHECK(find_rule("lie_algebra")->rule_class == RuleClass::convergence);
  CHECK(find_rule("no_such_rule") == nullptr);
}

TEST_CASE("a minimal configuration parses with defaults filled in") {
  ScenarioConfig cfg = parse_config_text(kSmallConfig);
  CHECK(cfg.system.particles == 1);
  CHECK(cfg.ensemble.betas.size() == 1);
  REQUIRE(cfg.checks.size() == 4);
  CHECK(cfg.checks[0].rule == "force_balance");
  CHECK(cfg.checks[0].doublings == 2);
  CHECK(cfg.checks[1].observable.name == "random_hermitian");
  CHECK(cfg.checks[1].observable.seed == 3);
  CHECK(cfg.inject_asymmetry == 0.0);
}

TEST_CASE("unknown rule identifiers are named in the error") {
  const char* bad = R"({
    "system": {"basis": "oscillator", "n_max": 16, "particles": 1,
               "statistics": "distinguishable",
               "potential": {"kind": "harmonic", "omega": 1.0}},
    "ensemble": {"kind": "canonical", "beta": [1.0]},
    "checks": [{"rule": "not_a_rule"}]
  })";
  try {
    parse_config_text(bad);
    FAIL("expected a configuration error");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("not_a_rule") != std::string::npos);
  }
}

TEST_CASE("an empty temperature list is rejected") {
  const char* bad = R"({
    "system": {"basis": "oscillator", "n_max": 16, "particles": 1,
               "statistics": "distinguishable",
               "potential": {"kind": "harmonic", "omega": 1.0}},
    "ensemble": {"kind": "canonical", "beta": []},
    "checks": [{"rule": "force_balance"}]
  })";
  CHECK_THROWS_AS(parse_config_text(bad), ConfigError);
}

TEST_CASE("unknown keys are rejected with their location") {
  const char* bad = R"({
    "system": {"basis": "oscillator", "n_max": 16, "particles": 1,
               "statistics": "distinguishable", "wobble": 3,
               "potential": {"kind": "harmonic", "omega": 1.0}},
    "ensemble": {"kind": "canonical", "beta": [1.0]},
    "checks": [{"rule": "force_balance"}]
  })";
  try {
    parse_config_text(bad);
    FAIL("expected a configuration error");
  } catch (const ConfigError& e) {
    CHECK(e.pointer().find("system") != std::string::npos);
    CHECK(std::string(e.what()).find("wobble") != std::string::npos);
  }
}

TEST_CASE("a small scenario runs clean and writes its artifacts") {
  ScenarioConfig cfg = parse_config_text(kSmallConfig);
  const std::string dir = fresh_dir("run");
  ScenarioResult res = run_scenario(cfg, dir);
  CHECK(res.pass);
  CHECK(res.exit_code == 0);
  REQUIRE(res.outcomes.size() == 4);
  for (const RuleOutcome& o : res.outcomes) {
    CHECK(o.pass);
    CHECK(o.error.empty());
    CHECK(o.worst <= o.tolerance);
    CHECK(fs::exists(fs::path(dir) / o.csv_file));
  }
  CHECK(fs::exists(res.summary_path));
  const std::string summary = slurp(res.summary_path);
  CHECK(summary.find("\"checks\"") != std::string::npos);
}

TEST_CASE("reruns of the same configuration are byte identical") {
  ScenarioConfig cfg = parse_config_text(kSmallConfig);
  const std::string a = fresh_dir("det_a");
  const std::string b = fresh_dir("det_b");
  ScenarioResult ra = run_scenario(cfg, a);
  ScenarioResult rb = run_scenario(cfg, b);
  REQUIRE(ra.outcomes.size() == rb.outcomes.size());
  for (std::size_t i = 0; i < ra.outcomes.size(); ++i) {
    const std::string ca = slurp((fs::path(a) / ra.outcomes[i].csv_file).string());
    const std::string cb = slurp((fs::path(b) / rb.outcomes[i].csv_file).string());
    CHECK(!ca.empty());
    CHECK(ca == cb);
  }
}

TEST_CASE("a seeded asymmetry defeats the exact identities") {
  ScenarioConfig cfg = parse_config_text(kSmallConfig);
  cfg.inject_asymmetry = 1e-3;
  const std::string dir = fresh_dir("inject");
  ScenarioResult res = run_scenario(cfg, dir);
  CHECK(!res.pass);
  CHECK(res.exit_code != 0);
  int failed = 0;
  for (const RuleOutcome& o : res.outcomes)
    if (!o.pass) ++failed;
  CHECK(failed >= 2);
}

TEST_CASE("grid scenarios accept the difference scheme end to end") {
  const char* text = R"({
    "system": {
      "basis": "grid", "sites": 16, "length": 6.4,
      "boundary": "periodic", "momentum": "central_difference",
      "particles": 1, "statistics": "distinguishable",
      "potential": {"kind": "harmonic", "omega": 1.0}
    },
    "ensemble": {"kind": "canonical", "beta": [1.0]},
    "checks": [
      {"rule": "force_balance", "stride": 4},
      {"rule": "quadrature_consistency", "observable": {"name": "sum_p"}}
    ]
  })";
  ScenarioConfig cfg = parse_config_text(text);
  const std::string dir = fresh_dir("grid");
  ScenarioResult res = run_scenario(cfg, dir);
  CHECK(res.pass);
}

TEST_CASE("convergence checks report a shrinking residual ladder") {
  const char* text = R"({
    "system": {
      "basis": "grid", "sites": 32, "length": 8.0,
      "boundary": "periodic", "momentum": "central_difference",
      "particles": 1, "statistics": "distinguishable",
      "potential": {"kind": "harmonic", "omega": 1.0}
    },
    "ensemble": {"kind": "canonical", "beta": [1.0]},
    "checks": [{"rule": "density_from_shift", "doublings": 2}]
  })";
  ScenarioConfig cfg = parse_config_text(text);
  const std::string dir = fresh_dir("conv");
  ScenarioResult res = run_scenario(cfg, dir);
  REQUIRE(res.outcomes.size() == 1);
  const RuleOutcome& o = res.outcomes[0];
  CHECK(o.pass);
  REQUIRE(o.series.size() == 3);
  REQUIRE(o.series_sizes.size() == 3);
  CHECK(o.series_sizes[0] == 32);
  CHECK(o.series_sizes[1] == 64);
  CHECK(o.series_sizes[2] == 128);
  CHECK(o.series[1] <= 0.5 * o.series[0]);
  CHECK(o.series[2] <= 0.5 * o.series[1]);
}

TEST_CASE("number-format round trip is exact") {
  for (double x : {0.1, 1.0 / 3.0, 6.02e23, -7.25, 0.0}) {
    CHECK(std::stod(csv_number(x)) == x);
  }
}

TEST_CASE("oscillator ground-state cancellation scenario holds its gates") {
  Fig1Options opt;
  opt.n_max = 60;
  opt.count = 81;
  opt.betas = {0.5, 2.0};
  const std::string dir = fresh_dir("fig1");
  Fig1Result res = fig1_scenario(opt, dir);
  CHECK(res.pass);
  REQUIRE(res.betas.size() == 2);
  CHECK(res.worst_cancellation <= 1e-9);
  CHECK(res.density_norm_defect <= 1e-6);
  CHECK(res.min_structure > 1e-6);
  CHECK(fs::exists(res.csv_path));
  CHECK(fs::exists(res.summary_path));
  // One header plus one row per (beta, position) pair.
  std::istringstream csv(slurp(res.csv_path));
  std::string line;
  int rows = 0;
  while (std::getline(csv, line))
    if (!line.empty()) ++rows;
  CHECK(rows == 1 + 2 * 81);
}
