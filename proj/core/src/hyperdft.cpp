#include "qgauge/hyperdft.hpp"

#include <cmath>
#include <stdexcept>

#include "internal/trace_kernels.hpp"

namespace qgauge {

using internal::accumulate_commutator_mean;
using internal::to_eig;

namespace {

void validate_ensemble(const ExtendedEnsemble& ens) {
  if (ens.systems.empty() || ens.systems.size() != ens.a.size()) {
    throw std::invalid_argument(
        "extended ensemble: systems and observables must pair up");
  }
  for (std::size_t i = 0; i < ens.systems.size(); ++i) {
    if (ens.systems[i] == nullptr) {
      throw std::invalid_argument("extended ensemble: null system");
    }
    require_hermitian(ens.a[i], "extended ensemble observable");
    if (ens.a[i].dim() != ens.systems[i]->dim()) {
      throw std::invalid_argument(
          "extended ensemble: observable dimension mismatch");
    }
  }
  if (!ens.grand && ens.systems.size() != 1) {
    throw std::invalid_argument(
        "extended ensemble: canonical form takes exactly one sector");
  }
}

std::vector<OperatorMatrix> sector_densities(const ExtendedEnsemble& ens,
                                             double r) {
  std::vector<OperatorMatrix> out;
  out.reserve(ens.systems.size());
  for (const ManyBodySystem* sys : ens.systems) {
    out.push_back(sys->density_operator(r));
  }
  return out;
}

const std::vector<double>& ensemble_points(const ExtendedEnsemble& ens) {
  return ens.systems[0]->eval_points();
}

// <F_0(r)>_st via the trace route, kinetic + interparticle + external.
Complex mean_base_force(const ThermalState& st, double r) {
  Complex mean = 0.0;
  double tv = 0.0;
  for (const auto& s : st.sectors) {
    const double hbar = s.system->basis().constants.hbar;
    const Matrix jt = to_eig(s, s.system->current_operator(r));
    const Matrix ht = to_eig(s, s.system->hamiltonian());
    accumulate_commutator_mean(hbar, 1.0, s.weights, ht, jt, mean, tv);
  }
  return mean / st.z_shifted;
}

// <S_A(r)>_st with one observable per sector.
Complex mean_shift(const ThermalState& st, const std::vector<OperatorMatrix>& a,
                   double r) {
  Complex mean = 0.0;
  double tv = 0.0;
  for (std::size_t i = 0; i < st.sectors.size(); ++i) {
    const auto& s = st.sectors[i];
    const double hbar = s.system->basis().constants.hbar;
    const Matrix jt = to_eig(s, s.system->current_operator(r));
    const Matrix at = to_eig(s, a[i]);
    accumulate_commutator_mean(hbar, -1.0, s.weights, at, jt, mean, tv);
  }
  return mean / st.z_shifted;
}

}  // namespace

ExtendedEnsemble make_extended_canonical(const ManyBodySystem& sys,
                                         const OperatorMatrix& a, double beta) {
  ExtendedEnsemble ens;
  ens.systems = {&sys};
  ens.a = {a};
  ens.beta = beta;
  ens.grand = false;
  validate_ensemble(ens);
  return ens;
}

ExtendedEnsemble make_extended_grand(
    const std::vector<const ManyBodySystem*>& systems,
    const std::vector<OperatorMatrix>& a, double beta, double mu) {
  ExtendedEnsemble ens;
  ens.systems = systems;
  ens.a = a;
  ens.beta = beta;
  ens.grand = true;
  ens.mu = mu;
  validate_ensemble(ens);
  return ens;
}

ThermalState make_extended_state(const ExtendedEnsemble& ens, double lambda,
                                 const SpectralOptions& opts) {
  validate_ensemble(ens);
  std::vector<OperatorMatrix> hs;
  hs.reserve(ens.systems.size());
  for (std::size_t i = 0; i < ens.systems.size(); ++i) {
    hs.push_back(ens.systems[i]->hamiltonian() +
                 Complex(-lambda / ens.beta, 0.0) * ens.a[i]);
    hs.back().hermitian_hint = true;
  }
  if (!ens.grand) {
    return make_thermal_state_with_hamiltonian(*ens.systems[0], hs[0],
                                               ens.beta, opts);
  }
  std::vector<const OperatorMatrix*> ptrs;
  for (const auto& h : hs) ptrs.push_back(&h);
  return make_grand_state_with_hamiltonians(ens.systems, ptrs, ens.beta,
                                            ens.mu, opts);
}

SumRuleReport check_extended_force_balance(const ExtendedEnsemble& ens,
                                           double lambda,
                                           const std::vector<double>& rs) {
  validate_ensemble(ens);
  const ThermalState st = make_extended_state(ens, lambda);
  SumRuleReport rep{"extended_force_balance", RuleClass::exact_identity,
                    ens.beta, {}};
  const std::vector<double>& pts = rs.empty() ? ensemble_points(ens) : rs;

  struct Cache {
    Matrix kin, inter, ext, at;
    double part_max = 0.0, at_max = 0.0, w_max = 0.0;
  };
  std::vector<Cache> caches;
  for (std::size_t i = 0; i < st.sectors.size(); ++i) {
    const auto& s = st.sectors[i];
    Cache c{to_eig(s, s.system->kinetic()),
            to_eig(s, s.system->interparticle()),
            to_eig(s, s.system->external()), to_eig(s, ens.a[i])};
    c.part_max = std::max(
        {internal::max_abs(c.kin), internal::max_abs(c.inter),
         internal::max_abs(c.ext)});
    c.at_max = internal::max_abs(c.at);
    c.w_max = s.weights.maxCoeff();
    caches.push_back(std::move(c));
  }

  for (const double r : pts) {
    Complex mean[4] = {0.0, 0.0, 0.0, 0.0};
    double tv[4] = {0.0, 0.0, 0.0, 0.0};
    double floor = 0.0;
    const double coupling = lambda / ens.beta;
    for (std::size_t i = 0; i < st.sectors.size(); ++i) {
      const auto& s = st.sectors[i];
      const double hbar = s.system->basis().constants.hbar;
      const Matrix jt = to_eig(s, s.system->current_operator(r));
      accumulate_commutator_mean(hbar, 1.0, s.weights, caches[i].kin, jt,
                                 mean[0], tv[0]);
      accumulate_commutator_mean(hbar, 1.0, s.weights, caches[i].inter, jt,
                                 mean[1], tv[1]);
      accumulate_commutator_mean(hbar, 1.0, s.weights, caches[i].ext, jt,
                                 mean[2], tv[2]);
      accumulate_commutator_mean(hbar, -1.0, s.weights, caches[i].at, jt,
                                 mean[3], tv[3]);
      floor = std::max(floor, caches[i].w_max * internal::max_abs(jt) *
                                  std::max(caches[i].part_max,
                                           std::abs(coupling) *
                                               caches[i].at_max) /
                                  hbar);
    }
    mean[3] *= coupling;
    tv[3] *= std::abs(coupling);

    double scale = floor / st.z_shifted;
    Complex total = 0.0;
    for (int p = 0; p < 4; ++p) {
      mean[p] /= st.z_shifted;
      tv[p] /= st.z_shifted;
      total += mean[p];
      scale = std::max({scale, std::abs(mean[p]), tv[p]});
    }
    SumRuleRow row;
    row.r = r;
    row.residual = std::abs(total);
    row.scale = scale;
    row.extras = {{"force_kinetic", mean[0].real()},
                  {"force_interparticle", mean[1].real()},
                  {"force_external", mean[2].real()},
                  {"shift_term", mean[3].real()}};
    rep.rows.push_back(std::move(row));
  }
  return rep;
}

Profile hyperfluctuation_profile(const ExtendedEnsemble& ens,
                                 const ThermalState& st,
                                 const std::vector<double>& rs) {
  validate_ensemble(ens);
  const std::vector<double>& pts = rs.empty() ? ensemble_points(ens) : rs;
  std::vector<Complex> values;
  values.reserve(pts.size());
  for (const double r : pts) {
    values.push_back(mori_covariance(st, ens.a, sector_densities(ens, r)));
  }
  return make_profile("hyperfluctuation", pts, std::move(values));
}

namespace {

double order_from_pair(double coarse, double fine) {
  if (!(coarse > 0.0) || !(fine > 0.0)) return 0.0;
  return std::log2(coarse / fine);
}

}  // namespace

double ResponseProbe::measured_order() const {
  return order_from_pair(worst_abs, worst_abs_half);
}

double ScalarDerivativeProbe::measured_order() const {
  return order_from_pair(residual, residual_half);
}

ResponseProbe probe_density_response(const ExtendedEnsemble& ens, double delta,
                                     const std::vector<double>& rs) {
  validate_ensemble(ens);
  if (!(delta > 0.0)) {
    throw std::invalid_argument("probe_density_response: delta must be > 0");
  }
  const std::vector<double>& pts = rs.empty() ? ensemble_points(ens) : rs;
  const ThermalState st0 = make_extended_state(ens, 0.0);
  const ThermalState stp = make_extended_state(ens, delta);
  const ThermalState stm = make_extended_state(ens, -delta);
  const ThermalState stp2 = make_extended_state(ens, 0.5 * delta);
  const ThermalState stm2 = make_extended_state(ens, -0.5 * delta);

  ResponseProbe probe;
  probe.delta = delta;
  probe.rs = pts;
  for (const double r : pts) {
    const auto rho = sector_densities(ens, r);
    const double chi = mori_covariance(st0, ens.a, rho).real();
    const double dp = thermal_average(stp, rho).real();
    const double dm = thermal_average(stm, rho).real();
    const double fd = (dp - dm) / (2.0 * delta);
    const double dp2 = thermal_average(stp2, rho).real();
    const double dm2 = thermal_average(stm2, rho).real();
    const double fd_h = (dp2 - dm2) / delta;
    const double fd_rich = (4.0 * fd_h - fd) / 3.0;
    probe.reference.push_back(chi);
    probe.fd.push_back(fd);
    probe.fd_half.push_back(fd_h);
    probe.worst_abs = std::max(probe.worst_abs, std::abs(chi - fd));
    probe.worst_abs_half =
        std::max(probe.worst_abs_half, std::abs(chi - fd_h));
    probe.worst_extrapolated =
        std::max(probe.worst_extrapolated, std::abs(chi - fd_rich));
    probe.scale = std::max(probe.scale, std::abs(chi));
  }
  probe.scale = std::max(probe.scale, 1.0);
  return probe;
}

ResponseProbe probe_force_response(const ExtendedEnsemble& ens, double delta,
                                   const std::vector<double>& rs) {
  validate_ensemble(ens);
  if (!(delta > 0.0)) {
    throw std::invalid_argument("probe_force_response: delta must be > 0");
  }
  const std::vector<double>& pts = rs.empty() ? ensemble_points(ens) : rs;
  const ThermalState st0 = make_extended_state(ens, 0.0);
  const ThermalState stp = make_extended_state(ens, delta);
  const ThermalState stm = make_extended_state(ens, -delta);

  const ThermalState stp2 = make_extended_state(ens, 0.5 * delta);
  const ThermalState stm2 = make_extended_state(ens, -0.5 * delta);

  ResponseProbe probe;
  probe.delta = delta;
  probe.rs = pts;
  for (const double r : pts) {
    const double ref = -mean_shift(st0, ens.a, r).real() / ens.beta;
    const double fp = mean_base_force(stp, r).real();
    const double fm = mean_base_force(stm, r).real();
    const double fd = (fp - fm) / (2.0 * delta);
    const double fp2 = mean_base_force(stp2, r).real();
    const double fm2 = mean_base_force(stm2, r).real();
    const double fd_h = (fp2 - fm2) / delta;
    const double fd_rich = (4.0 * fd_h - fd) / 3.0;
    probe.reference.push_back(ref);
    probe.fd.push_back(fd);
    probe.fd_half.push_back(fd_h);
    probe.worst_abs = std::max(probe.worst_abs, std::abs(ref - fd));
    probe.worst_abs_half =
        std::max(probe.worst_abs_half, std::abs(ref - fd_h));
    probe.worst_extrapolated =
        std::max(probe.worst_extrapolated, std::abs(ref - fd_rich));
    probe.scale = std::max(probe.scale, std::abs(ref));
  }
  probe.scale = std::max(probe.scale, 1.0);
  return probe;
}

ScalarDerivativeProbe probe_potential_derivative(const ExtendedEnsemble& ens,
                                                 double delta) {
  validate_ensemble(ens);
  if (!ens.grand) {
    throw std::invalid_argument(
        "probe_potential_derivative: stated for grand ensembles only");
  }
  if (!(delta > 0.0)) {
    throw std::invalid_argument(
        "probe_potential_derivative: delta must be > 0");
  }
  const ThermalState st0 = make_extended_state(ens, 0.0);
  const ThermalState stp = make_extended_state(ens, delta);
  const ThermalState stm = make_extended_state(ens, -delta);
  const ThermalState stp2 = make_extended_state(ens, 0.5 * delta);
  const ThermalState stm2 = make_extended_state(ens, -0.5 * delta);

  ScalarDerivativeProbe probe;
  probe.delta = delta;
  probe.reference = thermal_average(st0, ens.a).real();
  // beta Omega = -log Z; <A> = -d(beta Omega)/dlambda.
  probe.fd = (-stp.log_partition + stm.log_partition) / (2.0 * delta);
  probe.fd_half = (-stp2.log_partition + stm2.log_partition) / delta;
  const double fd_rich = (4.0 * probe.fd_half - probe.fd) / 3.0;
  probe.residual = std::abs(probe.reference + probe.fd);
  probe.residual_half = std::abs(probe.reference + probe.fd_half);
  probe.residual_extrapolated = std::abs(probe.reference + fd_rich);
  probe.scale = std::max(1.0, std::abs(probe.reference));
  return probe;
}

ChiIntegral chi_number_covariance(const ExtendedEnsemble& ens,
                                  const ThermalState& st) {
  validate_ensemble(ens);
  const Profile chi = hyperfluctuation_profile(ens, st);
  const double h = ens.systems[0]->eval_weight();
  ChiIntegral out;
  for (const Complex& v : chi.values) {
    out.integral += h * v.real();
  }
  std::vector<OperatorMatrix> number_ops;
  for (const ManyBodySystem* sys : ens.systems) {
    OperatorMatrix n = identity_operator(sys->dim());
    n.entries *= static_cast<double>(sys->particle_count());
    number_ops.push_back(std::move(n));
  }
  out.covariance = mori_covariance(st, ens.a, number_ops).real();
  return out;
}

}  // namespace qgauge
