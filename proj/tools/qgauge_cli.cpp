// Command-line front end: declarative scenario runs, the covariance
// profile dataset, rule listing and config validation.

#include <cstdio>
#include <exception>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "qgauge/scenario.hpp"

namespace {

constexpr int kExitPass = 0;
constexpr int kExitCheckFailure = 1;
constexpr int kExitConfigError = 2;

const char* class_name(qgauge::RuleClass c) {
  return c == qgauge::RuleClass::convergence ? "convergence" : "exact";
}

int run_check(const std::string& config_path, const std::string& out_dir,
              double tol_scale) {
  qgauge::ScenarioConfig cfg;
  try {
    cfg = qgauge::parse_config_file(config_path);
  } catch (const qgauge::ConfigError& e) {
    std::fprintf(stderr, "config error at %s\n", e.what());
    return kExitConfigError;
  }
  qgauge::ScenarioResult result;
  try {
    result = qgauge::run_scenario(cfg, out_dir, tol_scale);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitCheckFailure;
  }
  std::printf("%-44s %-12s %-13s %-10s %s\n", "rule", "class", "worst",
              "tolerance", "status");
  for (const qgauge::RuleOutcome& out : result.outcomes) {
    std::printf("%-44s %-12s %-13s %-10s %s\n", out.rule.c_str(),
                class_name(out.rule_class),
                qgauge::csv_number(out.worst).c_str(),
                qgauge::csv_number(out.tolerance).c_str(),
                out.pass ? "pass" : "FAIL");
    if (!out.error.empty()) {
      std::printf("  error: %s\n", out.error.c_str());
    }
  }
  std::printf("summary: %s (%.2fs, %s)\n", result.pass ? "pass" : "FAIL",
              result.wall_seconds, result.summary_path.c_str());
  return result.exit_code;
}

int run_fig1(const qgauge::Fig1Options& options, const std::string& out_dir) {
  qgauge::Fig1Result result;
  try {
    result = qgauge::fig1_scenario(options, out_dir);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitCheckFailure;
  }
  std::printf("wrote %s (%zu temperatures x %d points)\n",
              result.csv_path.c_str(), result.betas.size(), options.count);
  std::printf("worst cancellation     %s\n",
              qgauge::csv_number(result.worst_cancellation).c_str());
  std::printf("density norm defect    %s\n",
              qgauge::csv_number(result.density_norm_defect).c_str());
  std::printf("gaussian defect        %s\n",
              qgauge::csv_number(result.gaussian_defect).c_str());
  std::printf("summary: %s (%s)\n", result.pass ? "pass" : "FAIL",
              result.summary_path.c_str());
  return result.pass ? kExitPass : kExitCheckFailure;
}

int run_list_rules() {
  std::printf("%-26s %-12s %-10s %s\n", "id", "class", "tolerance",
              "statement");
  for (const qgauge::RuleInfo& info : qgauge::rule_registry()) {
    std::printf("%-26s %-12s %-10s %s\n", info.id.c_str(),
                class_name(info.rule_class),
                qgauge::csv_number(info.tolerance).c_str(),
                info.summary.c_str());
  }
  return kExitPass;
}

int run_validate(const std::string& config_path) {
  try {
    qgauge::parse_config_file(config_path);
  } catch (const qgauge::ConfigError& e) {
    std::fprintf(stderr, "config error at %s\n", e.what());
    return kExitConfigError;
  }
  std::printf("ok\n");
  return kExitPass;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"thermal sum-rule laboratory for shifting-invariance checks"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir;
  double tol_scale = 1.0;

  CLI::App* check = app.add_subcommand("check", "run the checks of a config");
  check->add_option("--config", config_path, "JSON scenario config")
      ->required();
  check->add_option("--out", out_dir, "output directory override");
  check->add_option("--tol-scale", tol_scale,
                    "multiply every tolerance; recorded in the summary");

  qgauge::Fig1Options fig1_options;
  std::string fig1_out = "out";
  CLI::App* fig1 = app.add_subcommand(
      "fig1", "emit the covariance profile dataset for the harmonic trap");
  fig1->add_option("--out", fig1_out, "output directory");
  fig1->add_option("--n-max", fig1_options.n_max, "basis truncation");
  fig1->add_option("--beta", fig1_options.betas,
                   "inverse temperatures (default 0.5..6 step 0.5)");
  fig1->add_option("--points", fig1_options.count, "evaluation points");

  CLI::App* list_rules =
      app.add_subcommand("list-rules", "print rule ids, classes, tolerances");

  CLI::App* validate =
      app.add_subcommand("validate", "parse a config and report errors");
  validate->add_option("--config", config_path, "JSON scenario config")
      ->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitPass : kExitConfigError;
  }

  if (check->parsed()) return run_check(config_path, out_dir, tol_scale);
  if (fig1->parsed()) return run_fig1(fig1_options, fig1_out);
  if (list_rules->parsed()) return run_list_rules();
  if (validate->parsed()) return run_validate(config_path);
  return kExitConfigError;
}
