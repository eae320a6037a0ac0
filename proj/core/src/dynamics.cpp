#include "qgauge/dynamics.hpp"

#include <cmath>
#include <stdexcept>

#include "internal/trace_kernels.hpp"

namespace qgauge {

using internal::accumulate_commutator_mean;
using internal::accumulate_pairing;
using internal::force_from_eigenvalues;

Protocol::Protocol(const ManyBodySystem& sys,
                   std::vector<ProtocolSegment> segments,
                   const SpectralOptions& opts)
    : sys_(&sys) {
  if (segments.empty()) {
    throw std::invalid_argument("Protocol: at least one segment is required");
  }
  for (const auto& seg : segments) {
    if (!(seg.duration > 0.0) || !std::isfinite(seg.duration)) {
      throw std::invalid_argument("Protocol: segment durations must be > 0");
    }
    if (seg.hamiltonian.dim() != sys.dim()) {
      throw std::invalid_argument(
          "Protocol: segment Hamiltonian dimension mismatch");
    }
    durations_.push_back(seg.duration);
    decs_.push_back(spectral_decompose(seg.hamiltonian, opts));
    total_ += seg.duration;
  }
}

Matrix Protocol::propagator(double t) const {
  const double slack = 1e-12 * std::max(1.0, total_);
  if (!(t >= -slack) || !(t <= total_ + slack)) {
    throw std::invalid_argument("Protocol: time outside [0, total duration]");
  }
  const double hbar = sys_->basis().constants.hbar;
  const Index d = sys_->dim();
  Matrix u = Matrix::Identity(d, d);
  double remaining = std::min(std::max(t, 0.0), total_);
  for (std::size_t k = 0; k < decs_.size() && remaining > 0.0; ++k) {
    const double dt = std::min(remaining, durations_[k]);
    const auto& dec = decs_[k];
    Eigen::VectorXcd phases(d);
    for (Index n = 0; n < d; ++n) {
      phases(n) = std::exp(Complex(0.0, -dec.eigenvalues(n) * dt / hbar));
    }
    u = (dec.eigenvectors * phases.asDiagonal() * dec.eigenvectors.adjoint()) *
        u;
    remaining -= dt;
  }
  return u;
}

OperatorMatrix Protocol::heisenberg(double t, const OperatorMatrix& a) const {
  if (a.dim() != sys_->dim()) {
    throw std::invalid_argument("Protocol::heisenberg: dimension mismatch");
  }
  const Matrix u = propagator(t);
  OperatorMatrix out{u.adjoint() * a.entries * u, a.hermitian_hint};
  return out;
}

double Protocol::unitarity_defect(double t) const {
  const Matrix u = propagator(t);
  const Index d = u.rows();
  return (u.adjoint() * u - Matrix::Identity(d, d)).cwiseAbs().maxCoeff();
}

namespace {

void require_initial_state(const ThermalState& st, const Protocol& proto,
                           const char* who) {
  if (st.sectors.size() != 1 || st.sectors[0].system != &proto.system()) {
    throw std::invalid_argument(
        std::string(who) +
        ": the initial state must be the canonical state of the driven "
        "system");
  }
}

}  // namespace

OperatorMatrix shift_current(const ThermalState& st, const Protocol& proto,
                             double r, double t) {
  require_initial_state(st, proto, "shift_current");
  const ManyBodySystem& sys = proto.system();
  const double hbar = sys.basis().constants.hbar;
  const OperatorMatrix jt = proto.heisenberg(t, sys.current_operator(r));
  OperatorMatrix out =
      Complex(0.0, st.beta / hbar) * commutator(sys.hamiltonian(), jt);
  out.hermitian_hint = true;
  return out;
}

SumRuleReport check_shift_current_zero(const ThermalState& st,
                                       const Protocol& proto,
                                       const std::vector<double>& times,
                                       const std::vector<double>& rs) {
  require_initial_state(st, proto, "check_shift_current_zero");
  const ManyBodySystem& sys = proto.system();
  const auto& s = st.sectors[0];
  const double hbar = sys.basis().constants.hbar;
  SumRuleReport rep{"shift_current_zero", RuleClass::exact_identity, st.beta,
                    {}};
  const std::vector<double>& pts = rs.empty() ? sys.eval_points() : rs;

  const Matrix kin = internal::to_eig(s, sys.kinetic());
  const Matrix inter = internal::to_eig(s, sys.interparticle());
  const Matrix ext = internal::to_eig(s, sys.external());
  const double part_max =
      std::max({internal::max_abs(kin), internal::max_abs(inter),
                internal::max_abs(ext)});
  const double w_max = s.weights.maxCoeff();

  for (const double t : times) {
    // Composite frame: Heisenberg evolution followed by the eigenbasis
    // rotation, one dense product per time.
    const Matrix frame = proto.propagator(t) * s.dec.eigenvectors;
    for (const double r : pts) {
      const Matrix jt =
          frame.adjoint() * sys.current_operator(r).entries * frame;
      Complex mean[3] = {0.0, 0.0, 0.0};
      double tv[3] = {0.0, 0.0, 0.0};
      accumulate_commutator_mean(hbar, 1.0, s.weights, kin, jt, mean[0],
                                 tv[0]);
      accumulate_commutator_mean(hbar, 1.0, s.weights, inter, jt, mean[1],
                                 tv[1]);
      accumulate_commutator_mean(hbar, 1.0, s.weights, ext, jt, mean[2],
                                 tv[2]);
      double scale = st.beta * w_max * part_max * internal::max_abs(jt) /
                     (hbar * st.z_shifted);
      Complex total = 0.0;
      for (int p = 0; p < 3; ++p) {
        mean[p] *= st.beta / st.z_shifted;
        tv[p] *= st.beta / st.z_shifted;
        total += mean[p];
        scale = std::max({scale, std::abs(mean[p]), tv[p]});
      }
      SumRuleRow row;
      row.r = r;
      row.t = t;
      row.residual = std::abs(total);
      row.scale = scale;
      row.extras = {{"current_kinetic", mean[0].real()},
                    {"current_interparticle", mean[1].real()},
                    {"current_external", mean[2].real()}};
      rep.rows.push_back(std::move(row));
    }
  }
  return rep;
}

SumRuleReport check_hypercurrent(const ThermalState& st, const Protocol& proto,
                                 const OperatorMatrix& a,
                                 const std::string& label,
                                 const std::vector<double>& times,
                                 const std::vector<double>& rs) {
  require_initial_state(st, proto, "check_hypercurrent");
  require_hermitian(a, "check_hypercurrent observable");
  const ManyBodySystem& sys = proto.system();
  const auto& s = st.sectors[0];
  const double hbar = sys.basis().constants.hbar;
  SumRuleReport rep{"hypercurrent[" + label + "]", RuleClass::exact_identity,
                    st.beta, {}};
  const std::vector<double>& pts = rs.empty() ? sys.eval_points() : rs;

  const double w_max = s.weights.maxCoeff();
  for (const double t : times) {
    const Matrix frame = proto.propagator(t) * s.dec.eigenvectors;
    const Matrix at = frame.adjoint() * a.entries * frame;
    const double at_max = internal::max_abs(at);
    for (const double r : pts) {
      const Matrix jt =
          frame.adjoint() * sys.current_operator(r).entries * frame;
      Complex mean = 0.0, pairing = 0.0;
      double tv_mean = 0.0, tv_pairing = 0.0;
      accumulate_commutator_mean(hbar, -1.0, s.weights, at, jt, mean, tv_mean);
      const Matrix ct =
          st.beta * force_from_eigenvalues(hbar, s.dec.eigenvalues, jt);
      accumulate_pairing(st, s, at, ct, pairing, tv_pairing);
      mean /= st.z_shifted;
      tv_mean /= st.z_shifted;
      // (A(t) | C) carries the 1/beta of the pairing against C's beta.
      pairing /= st.beta * st.z_shifted;
      tv_pairing /= st.beta * st.z_shifted;
      const double floor =
          std::max(w_max * at_max * internal::max_abs(jt) / hbar,
                   internal::pair_weight_bound(st, s) * at_max *
                       internal::max_abs(ct) / st.beta) /
          st.z_shifted;

      SumRuleRow row;
      row.r = r;
      row.t = t;
      row.residual = std::abs(std::conj(mean) + pairing);
      row.scale = std::max(
          {std::abs(mean), tv_mean, std::abs(pairing), tv_pairing, floor});
      row.extras = {{"shift_mean", mean.real()}, {"pairing", pairing.real()}};
      rep.rows.push_back(std::move(row));
    }
  }
  return rep;
}

}  // namespace qgauge
