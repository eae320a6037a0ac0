#pragma once

#include <string>
#include <utility>
#include <vector>

#include "qgauge/thermal.hpp"

namespace qgauge {

enum class RuleClass { exact_identity, convergence };

// One evaluated instance of a rule. residual is the raw cancellation
// defect; scale is the size of the largest participating term (mean or
// total-variation, whichever is bigger), so residual/scale certifies
// cancellation rather than accidental smallness. Unused coordinates
// stay NaN.
struct SumRuleRow {
  double r = std::numeric_limits<double>::quiet_NaN();
  double r2 = std::numeric_limits<double>::quiet_NaN();
  double t = std::numeric_limits<double>::quiet_NaN();
  double residual = 0.0;
  double scale = 0.0;
  std::vector<std::pair<std::string, double>> extras;
};

struct SumRuleReport {
  std::string rule;
  RuleClass rule_class = RuleClass::exact_identity;
  double beta = 0.0;
  std::vector<SumRuleRow> rows;

  // Largest residual/scale over the rows; rows with zero scale and
  // zero residual contribute nothing, zero scale with a residual is
  // infinite.
  double worst_ratio() const;
};

// <F_0(r)> = 0 term by term: kinetic, interparticle and external force
// densities cancel in equilibrium at every point.
SumRuleReport check_force_balance(const ThermalState& st,
                                  const std::vector<double>& rs = {});

// conj<S_A(r)> + (A | beta F_0(r)) = 0, the hyperforce balance in its
// adjoint pairing form. One observable per sector.
SumRuleReport check_hyperforce(const ThermalState& st,
                               const std::vector<OperatorMatrix>& a,
                               const std::string& label,
                               const std::vector<double>& rs = {});

// conj(<S_A B> + <A S_B>) + (AB | beta F_0(r)) = 0, the Leibniz form
// over a product observable.
SumRuleReport check_product_rule(const ThermalState& st,
                                 const std::vector<OperatorMatrix>& a,
                                 const std::vector<OperatorMatrix>& b,
                                 const std::string& label,
                                 const std::vector<double>& rs = {});

// (beta F_0(r) | beta F_0(r')) + <K_0(r,r')> = 0 with K_0 the shifting
// action applied to the scaled force density.
SumRuleReport check_3g(const ThermalState& st,
                       const std::vector<double>& rs = {},
                       const std::vector<double>& rs2 = {});

// Evaluation grid shared by the sectors; throws if they disagree.
const std::vector<double>& shared_eval_points(const ThermalState& st);

// Every stride-th entry of the shared grid, always keeping the first.
std::vector<double> strided_points(const std::vector<double>& pts,
                                   std::size_t stride);

}  // namespace qgauge
