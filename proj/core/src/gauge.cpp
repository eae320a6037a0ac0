#include "qgauge/gauge.hpp"

#include <cmath>
#include <stdexcept>

namespace qgauge {

OperatorMatrix sigma_apply(const ManyBodySystem& sys, double r,
                           const OperatorMatrix& a) {
  const OperatorMatrix& j = sys.current_operator(r);
  require_same_dim(a, j, "sigma_apply");
  OperatorMatrix out = Complex(0.0, -1.0 / sys.basis().constants.hbar) *
                       commutator(a, j);
  // [A, J] is anti-Hermitian for Hermitian A, so -i/hbar times it is
  // Hermitian again.
  out.hermitian_hint = a.hermitian_hint;
  return out;
}

OperatorMatrix hyperforce_density(const ManyBodySystem& sys, double r,
                                  const OperatorMatrix& a) {
  return sigma_apply(sys, r, a);
}

ForceDensityParts force_density(const ManyBodySystem& sys, double r) {
  const double hbar = sys.basis().constants.hbar;
  const OperatorMatrix& j = sys.current_operator(r);
  auto part = [&](const OperatorMatrix& h_piece) {
    OperatorMatrix out = Complex(0.0, 1.0 / hbar) * commutator(h_piece, j);
    out.hermitian_hint = true;
    return out;
  };
  ForceDensityParts parts{OperatorMatrix{}, part(sys.kinetic()),
                          part(sys.interparticle()), part(sys.external())};
  parts.total = parts.kinetic + parts.interparticle + parts.external;
  return parts;
}

OperatorMatrix sigma_integrated_apply(const ManyBodySystem& sys,
                                      const ShiftField& eps,
                                      const OperatorMatrix& a) {
  OperatorMatrix g = sys.weighted_momentum(eps.eval);
  OperatorMatrix out =
      Complex(0.0, -0.5 / sys.basis().constants.hbar) * commutator(a, g);
  out.hermitian_hint = a.hermitian_hint;
  return out;
}

double anti_self_adjoint_defect(const ManyBodySystem& sys, double r,
                                const OperatorMatrix& a,
                                const OperatorMatrix& b) {
  const OperatorMatrix sb = sigma_apply(sys, r, b);
  const OperatorMatrix sa = sigma_apply(sys, r, a);
  const Complex t1 = (a.entries * sb.entries).trace();
  const Complex t2 = (sa.entries * b.entries).trace();
  const double tv1 =
      (a.entries.cwiseAbs() * sb.entries.cwiseAbs()).trace();
  const double tv2 =
      (sa.entries.cwiseAbs() * b.entries.cwiseAbs()).trace();
  return std::abs(t1 + t2) / std::max({1.0, tv1, tv2});
}

LowSubspace low_subspace(const ManyBodySystem& sys) {
  return low_subspace(sys, 0);
}

LowSubspace low_subspace(const ManyBodySystem& sys, Index keep) {
  const SpectralDecomposition dec = spectral_decompose(sys.hamiltonian());
  if (keep <= 0 || keep > dec.dim()) {
    keep = (dec.dim() + 1) / 2;
  }
  return {dec.eigenvectors.leftCols(keep)};
}

double projected_residual(const LowSubspace& q, const OperatorMatrix& lhs,
                          const OperatorMatrix& rhs) {
  require_same_dim(lhs, rhs, "projected_residual");
  if (q.basis.rows() != lhs.dim()) {
    throw std::invalid_argument(
        "projected_residual: subspace dimension mismatch");
  }
  const Matrix l = q.basis.adjoint() * lhs.entries * q.basis;
  const Matrix r = q.basis.adjoint() * rhs.entries * q.basis;
  const double diff = (l - r).cwiseAbs().maxCoeff();
  const double scale = std::max(
      {1.0, l.cwiseAbs().maxCoeff(), r.cwiseAbs().maxCoeff()});
  return diff / scale;
}

namespace {

// Discrete coefficient of the delta-prime in the shift commutator,
// (d_{j+1,k} - d_{j-1,k}) / (4 h^2), with periodic wrap or hard-wall
// truncation at the edges. The band-1 current operators commute into
// band-2 hops, which spread the derivative weight across two sites;
// on smooth states each adjacent sample carries half the naive
// central-difference value, and 1/(4 h^2) is the coefficient the
// algebra itself converges to under grid refinement.
double delta_prime_coefficient(const GridSpec& grid, std::size_t j,
                               std::size_t k, double h) {
  const std::size_t m = static_cast<std::size_t>(grid.sites);
  double c = 0.0;
  if (grid.boundary == Boundary::periodic) {
    if ((j + 1) % m == k) c += 1.0;
    if ((j + m - 1) % m == k) c -= 1.0;
  } else {
    if (j + 1 < m && j + 1 == k) c += 1.0;
    if (j >= 1 && j - 1 == k) c -= 1.0;
  }
  return c / (4.0 * h * h);
}

}  // namespace

double check_sigma_commutator(const ManyBodySystem& sys, const LowSubspace& q,
                              double r, double rp, const OperatorMatrix& a) {
  if (!sys.basis().is_grid()) {
    throw std::invalid_argument(
        "check_sigma_commutator: defined for grid bases only");
  }
  const std::size_t j = sys.eval_index(r);
  const std::size_t k = sys.eval_index(rp);
  const double h = sys.eval_weight();

  const OperatorMatrix sr_a = sigma_apply(sys, r, a);
  const OperatorMatrix srp_a = sigma_apply(sys, rp, a);
  const OperatorMatrix lhs =
      sigma_apply(sys, r, srp_a) - sigma_apply(sys, rp, sr_a);
  const double c = delta_prime_coefficient(sys.basis().grid(), j, k, h);
  const OperatorMatrix rhs = Complex(c, 0.0) * (sr_a + srp_a);
  return projected_residual(q, lhs, rhs);
}

double check_lie_algebra(const ManyBodySystem& sys, const LowSubspace& q,
                         const ShiftField& e1, const ShiftField& e2,
                         const OperatorMatrix& a) {
  const OperatorMatrix s2a = sigma_integrated_apply(sys, e2, a);
  const OperatorMatrix s1a = sigma_integrated_apply(sys, e1, a);
  const OperatorMatrix lhs = sigma_integrated_apply(sys, e1, s2a) -
                             sigma_integrated_apply(sys, e2, s1a);
  const OperatorMatrix rhs =
      sigma_integrated_apply(sys, lie_bracket_field(e1, e2), a);
  return projected_residual(q, lhs, rhs);
}

CanonicalShiftResiduals check_canonical_shift(const ManyBodySystem& sys,
                                              const LowSubspace& q,
                                              const ShiftField& eps) {
  const OperatorMatrix pos_lhs = sigma_integrated_apply(sys, eps, sys.sum_x());
  const OperatorMatrix pos_rhs = sys.position_observable(eps.eval);
  const OperatorMatrix mom_lhs = sigma_integrated_apply(sys, eps, sys.sum_p());
  const OperatorMatrix mom_rhs =
      Complex(-0.5, 0.0) * sys.weighted_momentum(eps.grad);
  return {projected_residual(q, pos_lhs, pos_rhs),
          projected_residual(q, mom_lhs, mom_rhs)};
}

double check_density_from_shift(const ManyBodySystem& sys,
                                const LowSubspace& q, double r) {
  const OperatorMatrix lhs = sigma_apply(sys, r, sys.sum_x());
  return projected_residual(q, lhs, sys.density_operator(r));
}

double check_external_force_gradient(const ManyBodySystem& sys,
                                     const LowSubspace& q,
                                     const ScalarField& v_ext, double r) {
  if (!sys.basis().is_grid()) {
    throw std::invalid_argument(
        "check_external_force_gradient: defined for grid bases only");
  }
  if (!v_ext) {
    throw std::invalid_argument(
        "check_external_force_gradient: null potential");
  }
  const double h = sys.eval_weight();
  const double dv = (v_ext(r + h) - v_ext(r - h)) / (2.0 * h);
  const OperatorMatrix lhs =
      Complex(-1.0, 0.0) * sigma_apply(sys, r, sys.external());
  const OperatorMatrix rhs = Complex(-dv, 0.0) * sys.density_operator(r);
  return projected_residual(q, lhs, rhs);
}

}  // namespace qgauge
