#include "qgauge/thermal.hpp"

#include <cmath>
#include <stdexcept>

namespace qgauge {

namespace {

// sinh(x)/x continued through zero.
double sinhc(double x) {
  if (std::abs(x) < 1e-4) {
    const double x2 = x * x;
    return 1.0 + x2 / 6.0 + x2 * x2 / 120.0;
  }
  return std::sinh(x) / x;
}

ThermalState::SectorData make_sector(const ManyBodySystem& sys,
                                     const OperatorMatrix& h, double beta,
                                     double log_prefactor,
                                     const SpectralOptions& opts) {
  if (h.dim() != sys.dim()) {
    throw std::invalid_argument(
        "thermal state: Hamiltonian dimension does not match the system");
  }
  ThermalState::SectorData s;
  s.system = &sys;
  s.dec = spectral_decompose(h, opts);
  s.log_prefactor = log_prefactor;
  s.log_weights = (-beta) * s.dec.eigenvalues.array() + log_prefactor;
  return s;
}

void finalize_weights(ThermalState& st) {
  double shift = -std::numeric_limits<double>::infinity();
  for (const auto& s : st.sectors) {
    shift = std::max(shift, s.log_weights.maxCoeff());
  }
  st.log_shift = shift;
  double z = 0.0;
  for (auto& s : st.sectors) {
    s.weights = (s.log_weights.array() - shift).exp();
    z += s.weights.sum();
  }
  st.z_shifted = z;
  st.log_partition = std::log(z) + shift;
}

double log_factorial(int n) { return std::lgamma(static_cast<double>(n) + 1.0); }

void require_positive_beta(double beta) {
  if (!(beta > 0.0) || !std::isfinite(beta)) {
    throw std::invalid_argument("thermal state: beta must be positive");
  }
}

}  // namespace

ThermalState make_thermal_state(const ManyBodySystem& sys, double beta,
                                const SpectralOptions& opts) {
  return make_thermal_state_with_hamiltonian(sys, sys.hamiltonian(), beta,
                                             opts);
}

ThermalState make_thermal_state_with_hamiltonian(const ManyBodySystem& sys,
                                                 const OperatorMatrix& h,
                                                 double beta,
                                                 const SpectralOptions& opts) {
  require_positive_beta(beta);
  ThermalState st;
  st.beta = beta;
  st.sectors.push_back(make_sector(sys, h, beta, 0.0, opts));
  finalize_weights(st);
  return st;
}

ThermalState make_grand_state(const std::vector<const ManyBodySystem*>& systems,
                              double beta, double mu,
                              const SpectralOptions& opts) {
  std::vector<const OperatorMatrix*> hs;
  hs.reserve(systems.size());
  for (const ManyBodySystem* sys : systems) {
    if (sys == nullptr) {
      throw std::invalid_argument("make_grand_state: null system");
    }
    hs.push_back(&sys->hamiltonian());
  }
  return make_grand_state_with_hamiltonians(systems, hs, beta, mu, opts);
}

ThermalState make_grand_state_with_hamiltonians(
    const std::vector<const ManyBodySystem*>& systems,
    const std::vector<const OperatorMatrix*>& hs, double beta, double mu,
    const SpectralOptions& opts) {
  require_positive_beta(beta);
  if (systems.empty() || systems.size() != hs.size()) {
    throw std::invalid_argument(
        "make_grand_state: sector systems and Hamiltonians must pair up");
  }
  ThermalState st;
  st.beta = beta;
  for (std::size_t i = 0; i < systems.size(); ++i) {
    if (systems[i] == nullptr || hs[i] == nullptr) {
      throw std::invalid_argument("make_grand_state: null sector entry");
    }
    const int n = systems[i]->particle_count();
    double pref = beta * mu * n;
    if (systems[i]->statistics() == Statistics::distinguishable) {
      pref -= log_factorial(n);
    }
    st.sectors.push_back(make_sector(*systems[i], *hs[i], beta, pref, opts));
  }
  finalize_weights(st);
  return st;
}

double thermal_pair_weight(double beta, double em, double en,
                           double log_prefactor, double log_shift) {
  const double lm = -beta * em + log_prefactor - log_shift;
  const double ln = -beta * en + log_prefactor - log_shift;
  const double gap = em - en;
  const double x = 0.5 * beta * gap;
  if (std::abs(beta * gap) <= 1.0) {
    return beta * std::exp(0.5 * (lm + ln)) * sinhc(x);
  }
  return (std::exp(ln) - std::exp(lm)) / gap;
}

double spectral_range(const ThermalState& st) {
  double range = 0.0;
  for (const auto& s : st.sectors) {
    if (s.dec.dim() > 0) {
      range = std::max(range, s.dec.eigenvalues(s.dec.dim() - 1) -
                                  s.dec.eigenvalues(0));
    }
  }
  return range;
}

double gap_tolerance(const ThermalState& st) {
  return kGapTolRel * std::max(1.0, spectral_range(st));
}

namespace {

void require_sector_count(const ThermalState& st, std::size_t n,
                          const char* who) {
  if (st.sectors.size() != n) {
    throw std::invalid_argument(std::string(who) +
                                ": one operator per sector is required");
  }
}

Complex sector_average(const ThermalState::SectorData& s,
                       const OperatorMatrix& a) {
  const Matrix at = s.dec.to_eigenbasis(a.entries);
  Complex acc = 0.0;
  for (Index n = 0; n < at.rows(); ++n) {
    acc += s.weights(n) * at(n, n);
  }
  return acc;
}

Complex sector_mori(const ThermalState& st, const ThermalState::SectorData& s,
                    const OperatorMatrix& a, const OperatorMatrix& b) {
  const Matrix at = s.dec.to_eigenbasis(a.entries);
  const Matrix bt = s.dec.to_eigenbasis(b.entries);
  const RealVector& e = s.dec.eigenvalues;
  Complex acc = 0.0;
  for (Index n = 0; n < at.rows(); ++n) {
    for (Index m = 0; m < at.cols(); ++m) {
      const double w = thermal_pair_weight(st.beta, e(m), e(n),
                                           s.log_prefactor, st.log_shift);
      acc += std::conj(at(n, m)) * bt(n, m) * w;
    }
  }
  return acc;
}

}  // namespace

Complex thermal_average(const ThermalState& st, const OperatorMatrix& a) {
  require_sector_count(st, 1, "thermal_average");
  return sector_average(st.sectors[0], a) / st.z_shifted;
}

Complex thermal_average(const ThermalState& st,
                        const std::vector<OperatorMatrix>& per_sector) {
  require_sector_count(st, per_sector.size(), "thermal_average");
  Complex acc = 0.0;
  for (std::size_t i = 0; i < st.sectors.size(); ++i) {
    acc += sector_average(st.sectors[i], per_sector[i]);
  }
  return acc / st.z_shifted;
}

Complex mori_product(const ThermalState& st, const OperatorMatrix& a,
                     const OperatorMatrix& b) {
  require_sector_count(st, 1, "mori_product");
  return sector_mori(st, st.sectors[0], a, b) / (st.beta * st.z_shifted);
}

Complex mori_product(const ThermalState& st,
                     const std::vector<OperatorMatrix>& a,
                     const std::vector<OperatorMatrix>& b) {
  require_sector_count(st, a.size(), "mori_product");
  if (a.size() != b.size()) {
    throw std::invalid_argument("mori_product: operator lists differ in size");
  }
  Complex acc = 0.0;
  for (std::size_t i = 0; i < st.sectors.size(); ++i) {
    acc += sector_mori(st, st.sectors[i], a[i], b[i]);
  }
  return acc / (st.beta * st.z_shifted);
}

Complex mori_covariance(const ThermalState& st, const OperatorMatrix& a,
                        const OperatorMatrix& b) {
  return mori_product(st, a, b) -
         std::conj(thermal_average(st, a)) * thermal_average(st, b);
}

Complex mori_covariance(const ThermalState& st,
                        const std::vector<OperatorMatrix>& a,
                        const std::vector<OperatorMatrix>& b) {
  return mori_product(st, a, b) -
         std::conj(thermal_average(st, a)) * thermal_average(st, b);
}

double check_boltzmann_identity(const ThermalState& st, double r) {
  double worst = 0.0;
  for (const auto& s : st.sectors) {
    const ManyBodySystem& sys = *s.system;
    const double hbar = sys.basis().constants.hbar;
    const OperatorMatrix& j = sys.current_operator(r);
    const Index d = s.dec.dim();

    // Site-basis route: assemble the shifted weight operator and take
    // the literal commutator with the momentum density.
    const Matrix rho = s.dec.eigenvectors *
                       s.weights.asDiagonal() *
                       s.dec.eigenvectors.adjoint();
    const Matrix lhs_site =
        Complex(0.0, -1.0 / hbar) * (rho * j.entries - j.entries * rho);
    const Matrix lhs =
        s.dec.eigenvectors.adjoint() * lhs_site * s.dec.eigenvectors;

    // Eigenbasis route: pair-weight kernel times the force matrix built
    // from eigenvalue differences.
    const Matrix jt = s.dec.eigenvectors.adjoint() * j.entries *
                      s.dec.eigenvectors;
    Matrix rhs(d, d);
    for (Index n = 0; n < d; ++n) {
      for (Index m = 0; m < d; ++m) {
        const double w =
            thermal_pair_weight(st.beta, s.dec.eigenvalues(n),
                                s.dec.eigenvalues(m), s.log_prefactor,
                                st.log_shift);
        const Complex f = Complex(0.0, 1.0 / hbar) *
                          (s.dec.eigenvalues(n) - s.dec.eigenvalues(m)) *
                          jt(n, m);
        rhs(n, m) = f * w;
      }
    }

    const double lmax = lhs.cwiseAbs().maxCoeff();
    const double rmax = rhs.cwiseAbs().maxCoeff();
    const double scale = std::max(lmax, rmax);
    if (scale > 0.0) {
      worst = std::max(worst, (lhs - rhs).cwiseAbs().maxCoeff() / scale);
    }
  }
  return worst;
}

}  // namespace qgauge
