#pragma once

#include <vector>

#include "qgauge/profile.hpp"
#include "qgauge/sum_rules.hpp"
#include "qgauge/thermal.hpp"

namespace qgauge {

// Ensemble family H(lambda) = H_0 - lambda A / beta over one or more
// sectors. Canonical means exactly one sector and no mu.
struct ExtendedEnsemble {
  std::vector<const ManyBodySystem*> systems;
  std::vector<OperatorMatrix> a;  // Hermitian, one per sector
  double beta = 1.0;
  bool grand = false;
  double mu = 0.0;
};

ExtendedEnsemble make_extended_canonical(const ManyBodySystem& sys,
                                         const OperatorMatrix& a, double beta);
ExtendedEnsemble make_extended_grand(
    const std::vector<const ManyBodySystem*>& systems,
    const std::vector<OperatorMatrix>& a, double beta, double mu);

// Thermal state of H(lambda); lambda = 0 reproduces the base state.
ThermalState make_extended_state(const ExtendedEnsemble& ens, double lambda,
                                 const SpectralOptions& opts = {});

// <F_0(r) + lambda S_A(r)/beta>_lambda = 0 at finite lambda; the force
// density of H(lambda) vanishes in its own equilibrium.
SumRuleReport check_extended_force_balance(const ExtendedEnsemble& ens,
                                           double lambda,
                                           const std::vector<double>& rs = {});

// chi_A(r) = cov(A | rho(r)) over the given state of the family.
Profile hyperfluctuation_profile(const ExtendedEnsemble& ens,
                                 const ThermalState& st,
                                 const std::vector<double>& rs = {});

// Central-difference probes. Each carries the analytic reference, the
// finite-difference value and the worst deviation; halving delta must
// shrink worst_abs quadratically.
struct ResponseProbe {
  double delta = 0.0;
  std::vector<double> rs;
  std::vector<double> reference;  // linear-response prediction
  std::vector<double> fd;         // central difference at +-delta
  std::vector<double> fd_half;    // central difference at +-delta/2
  double worst_abs = 0.0;
  double worst_abs_half = 0.0;
  double worst_extrapolated = 0.0;  // against the Richardson combination
  double scale = 0.0;               // max |reference|, floored at 1

  // Convergence order measured from the two step sizes.
  double measured_order() const;
};

// chi_A(r) against [rho(r; +delta) - rho(r; -delta)] / (2 delta).
ResponseProbe probe_density_response(const ExtendedEnsemble& ens, double delta,
                                     const std::vector<double>& rs = {});

// d<F_0(r)>/dlambda at 0 against -<S_A(r)>/beta.
ResponseProbe probe_force_response(const ExtendedEnsemble& ens, double delta,
                                   const std::vector<double>& rs = {});

// <A> against -d(beta Omega)/dlambda at 0; grand ensembles only.
struct ScalarDerivativeProbe {
  double delta = 0.0;
  double reference = 0.0;
  double fd = 0.0;
  double fd_half = 0.0;
  double residual = 0.0;
  double residual_half = 0.0;
  double residual_extrapolated = 0.0;
  double scale = 0.0;

  double measured_order() const;
};

ScalarDerivativeProbe probe_potential_derivative(const ExtendedEnsemble& ens,
                                                 double delta);

// Riemann sum of chi_A over the evaluation grid against cov(A|N); the
// two sides agree on grid bases and the canonical value is zero.
struct ChiIntegral {
  double integral = 0.0;
  double covariance = 0.0;
};

ChiIntegral chi_number_covariance(const ExtendedEnsemble& ens,
                                  const ThermalState& st);

}  // namespace qgauge
