#pragma once

#include <vector>

#include "qgauge/operator_matrix.hpp"
#include "qgauge/spectral.hpp"
#include "qgauge/sum_rules.hpp"
#include "qgauge/system.hpp"
#include "qgauge/thermal.hpp"

namespace qgauge {

struct ProtocolSegment {
  double duration = 0.0;
  OperatorMatrix hamiltonian;
};

// Piecewise-constant drive. Each segment is propagated spectrally, so
// the only time-discretisation error is the caller's staircasing.
class Protocol {
 public:
  Protocol(const ManyBodySystem& sys, std::vector<ProtocolSegment> segments,
           const SpectralOptions& opts = {});

  const ManyBodySystem& system() const { return *sys_; }
  double total_duration() const { return total_; }
  std::size_t segment_count() const { return durations_.size(); }

  // U(t) with the latest segment factor leftmost; t in [0, total].
  Matrix propagator(double t) const;

  // A(t) = U(t)^dagger A U(t).
  OperatorMatrix heisenberg(double t, const OperatorMatrix& a) const;

  double unitarity_defect(double t) const;

 private:
  const ManyBodySystem* sys_;
  std::vector<double> durations_;
  std::vector<SpectralDecomposition> decs_;
  double total_ = 0.0;
};

// C(r,t) = (i/hbar) [beta H_0, m J(r,t)] with the current evolved to
// time t; reduces to beta F_0(r) at t = 0.
OperatorMatrix shift_current(const ThermalState& st, const Protocol& proto,
                             double r, double t);

// <C(r,t)> = 0 over the initial equilibrium state at every time, with
// the kinetic / interparticle / external split of beta H_0 reported.
SumRuleReport check_shift_current_zero(const ThermalState& st,
                                       const Protocol& proto,
                                       const std::vector<double>& times,
                                       const std::vector<double>& rs = {});

// conj<S_A(r,t)> + (A(t) | C(r,t)) = 0 with the pairing taken in the
// initial thermal state.
SumRuleReport check_hypercurrent(const ThermalState& st, const Protocol& proto,
                                 const OperatorMatrix& a,
                                 const std::string& label,
                                 const std::vector<double>& times,
                                 const std::vector<double>& rs = {});

}  // namespace qgauge
