#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "qgauge/basis.hpp"
#include "qgauge/sum_rules.hpp"
#include "qgauge/system.hpp"

namespace qgauge {

// Parse or validation failure with a JSON-pointer style location of the
// offending field ("/checks/2/rule").
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string pointer, const std::string& message);
  const std::string& pointer() const { return pointer_; }

 private:
  std::string pointer_;
};

struct PotentialSpec {
  enum class Kind { none, harmonic, tilted, tabulated };
  Kind kind = Kind::none;
  double omega = 1.0;            // harmonic and tilted curvature
  double slope = 0.0;            // tilted linear coefficient
  std::vector<double> xs, vs;    // tabulated nodes
};

struct InteractionSpec {
  enum class Kind { none, gaussian };
  Kind kind = Kind::none;
  double strength = 0.0;
  double range = 1.0;
};

// basis + composition; "particles" is the sector count ceiling in the
// grand ensemble (sectors 0..particles) and the fixed count otherwise.
struct SystemBlock {
  BasisSpec basis;
  int particles = 1;
  Statistics statistics = Statistics::distinguishable;
  bool potential_given = false;  // default: harmonic at the basis omega
                                 // on oscillator bases, none on grids
  PotentialSpec potential;
  InteractionSpec interaction;
};

struct ObservableSpec {
  std::string name = "sum_x";  // identity | sum_x | sum_p | H0 | beta_H0
                               // | N_hat | random_hermitian
  std::uint64_t seed = 1;      // random_hermitian only
};

struct ProtocolSpec {
  struct Segment {
    double duration = 1.0;
    PotentialSpec potential;
  };
  std::vector<Segment> segments;
};

struct CheckSpec {
  std::string rule;
  ObservableSpec observable;
  bool observable_given = false;
  ObservableSpec observable_b;
  bool observable_b_given = false;
  double lambda = 0.3;   // extended_force_balance
  double delta = 5e-3;   // finite-difference probes
  int stride = 0;        // 0 = rule default point decimation
  int doublings = 2;     // convergence rules
  ProtocolSpec protocol;
  bool protocol_given = false;
  std::vector<double> times;
};

struct EnsembleBlock {
  std::vector<double> betas;
  bool grand = false;
  double mu = 0.0;
};

struct OutputBlock {
  std::string directory = "out";
  bool csv = true;
  bool json = true;
};

struct ScenarioConfig {
  SystemBlock system;
  EnsembleBlock ensemble;
  std::vector<CheckSpec> checks;
  OutputBlock output;
  double inject_asymmetry = 0.0;
  int workers = 0;  // 0 = QGAUGE_WORKERS env, else hardware concurrency
};

ScenarioConfig parse_config_text(const std::string& text);
ScenarioConfig parse_config_file(const std::string& path);

struct RuleInfo {
  std::string id;
  RuleClass rule_class;
  // Exact rules: residual ceiling as a multiple of the local term
  // scale. Convergence rules: largest admissible residual decay ratio
  // per basis doubling.
  double tolerance = 0.0;
  std::string summary;
};

const std::vector<RuleInfo>& rule_registry();
const RuleInfo* find_rule(const std::string& id);

// Potential / interaction / observable resolution shared with tests.
ScalarField resolve_potential(const PotentialSpec& spec, const BasisSpec& basis);
PairField resolve_interaction(const InteractionSpec& spec);
std::vector<OperatorMatrix> resolve_observable(
    const ObservableSpec& spec, const std::vector<const ManyBodySystem*>& sectors,
    double beta);
std::string observable_label(const ObservableSpec& spec);

struct RuleOutcome {
  std::string rule;     // decorated, e.g. "hyperforce[sum_x]"
  std::string id;       // registry id
  RuleClass rule_class = RuleClass::exact_identity;
  double tolerance = 0.0;  // after tol-scale
  bool pass = false;
  double worst = 0.0;   // worst residual/scale ratio or worst decay ratio
  std::string error;    // nonempty when evaluation threw
  std::vector<SumRuleReport> reports;     // exact rules, one per beta
  std::vector<double> series;             // convergence residual ladder
  std::vector<Index> series_sizes;        // basis size per rung
  std::string csv_file;
};

struct ScenarioResult {
  std::vector<RuleOutcome> outcomes;
  bool pass = false;
  int exit_code = 0;
  double wall_seconds = 0.0;
  std::string summary_path;
};

// Runs every configured check, writes per-check CSV plus summary.json
// into out_dir (config output directory when out_dir is empty).
// tol_scale multiplies every tolerance and is recorded in the summary.
ScenarioResult run_scenario(const ScenarioConfig& config,
                            const std::string& out_dir = "",
                            double tol_scale = 1.0);

struct Fig1Options {
  int n_max = 80;
  double omega = 1.0;
  double hbar = 1.0;
  double mass = 1.0;
  double span = 8.0;
  int count = 161;
  std::vector<double> betas;  // empty: 0.5, 1.0, ..., 6.0
};

struct Fig1Result {
  std::vector<double> betas;
  std::vector<double> cancellation;   // per beta: max|sum| / max|cov_kin|
  double worst_cancellation = 0.0;
  double density_norm_defect = 0.0;   // worst |Riemann sum - 1|
  double gaussian_defect = 0.0;       // vs analytic width at each beta, x=0
  double min_structure = 0.0;         // min over beta of max|cov| both parts
  bool pass = false;
  std::string csv_path;
  std::string summary_path;
};

Fig1Result fig1_scenario(const Fig1Options& options, const std::string& out_dir);

// Shortest round-trip decimal form of a binary64, used for all CSV
// payloads so reruns are byte-identical.
std::string csv_number(double x);

}  // namespace qgauge
