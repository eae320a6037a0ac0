#pragma once

#include <vector>

#include "qgauge/operator_matrix.hpp"
#include "qgauge/spectral.hpp"
#include "qgauge/system.hpp"

namespace qgauge {

// Scale-relative floor distinguishing "coincident" from "split" levels
// in tests that probe the pair-weight kernel near degeneracy.
inline constexpr double kGapTolRel = 1e-8;

// Equilibrium state over one or more fixed-N sectors. All weights are
// stored multiplied by exp(-log_shift) so the largest is exactly 1;
// partition sums and averages are formed from the shifted weights and
// the absolute normalisation is recovered through log_shift alone.
struct ThermalState {
  struct SectorData {
    const ManyBodySystem* system = nullptr;  // non-owning
    SpectralDecomposition dec;
    double log_prefactor = 0.0;          // beta mu N and exchange counting
    Eigen::VectorXd log_weights;         // -beta E_n + log_prefactor
    Eigen::VectorXd weights;             // exp(log_weights - log_shift)
  };

  double beta = 0.0;
  double log_shift = 0.0;
  double z_shifted = 0.0;
  double log_partition = 0.0;
  std::vector<SectorData> sectors;

  double free_energy() const { return -log_partition / beta; }
  double grand_potential() const { return -log_partition / beta; }
};

// Canonical state of one system; the Hamiltonian override exists so a
// driven or deliberately corrupted operator can replace the built one.
ThermalState make_thermal_state(const ManyBodySystem& sys, double beta,
                                const SpectralOptions& opts = {});
ThermalState make_thermal_state_with_hamiltonian(const ManyBodySystem& sys,
                                                 const OperatorMatrix& h,
                                                 double beta,
                                                 const SpectralOptions& opts = {});

// Grand ensemble over the given sectors at chemical potential mu.
// Distinguishable sectors carry 1/N!; exchange-projected sectors count
// each state once already.
ThermalState make_grand_state(const std::vector<const ManyBodySystem*>& systems,
                              double beta, double mu,
                              const SpectralOptions& opts = {});
ThermalState make_grand_state_with_hamiltonians(
    const std::vector<const ManyBodySystem*>& systems,
    const std::vector<const OperatorMatrix*>& hs, double beta, double mu,
    const SpectralOptions& opts = {});

// Shifted two-level weight (w(E_n) - w(E_m)) / (E_m - E_n), continued
// across the degenerate point. Small splittings go through a product
// form centred on the mean energy; large ones through the explicit
// difference of shifted weights. log_shift must be the state's.
double thermal_pair_weight(double beta, double em, double en,
                           double log_prefactor, double log_shift);

// Largest |E_max - E_min| across sectors, the scale behind gap floors.
double spectral_range(const ThermalState& st);
double gap_tolerance(const ThermalState& st);

// <A>; the per-sector form expects one operator per sector in order.
Complex thermal_average(const ThermalState& st, const OperatorMatrix& a);
Complex thermal_average(const ThermalState& st,
                        const std::vector<OperatorMatrix>& per_sector);

// (A|B): the two-sided thermal pairing, linear in B and conjugate
// linear in A, normalised so (1|1) = 1.
Complex mori_product(const ThermalState& st, const OperatorMatrix& a,
                     const OperatorMatrix& b);
Complex mori_product(const ThermalState& st,
                     const std::vector<OperatorMatrix>& a,
                     const std::vector<OperatorMatrix>& b);

// cov(A|B) = (A|B) - <A^dagger><B>.
Complex mori_covariance(const ThermalState& st, const OperatorMatrix& a,
                        const OperatorMatrix& b);
Complex mori_covariance(const ThermalState& st,
                        const std::vector<OperatorMatrix>& a,
                        const std::vector<OperatorMatrix>& b);

// Shifting action on the unnormalised weight operator against its
// eigenbasis kernel form; worst relative mismatch across sectors.
double check_boltzmann_identity(const ThermalState& st, double r);

}  // namespace qgauge
