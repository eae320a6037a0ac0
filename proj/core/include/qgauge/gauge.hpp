#pragma once

#include "qgauge/operator_matrix.hpp"
#include "qgauge/shift_field.hpp"
#include "qgauge/spectral.hpp"
#include "qgauge/system.hpp"

namespace qgauge {

// Local shifting action on an observable: (-i/hbar) [A, m J(r)].
// Annihilates the identity and maps Hermitian to Hermitian.
OperatorMatrix sigma_apply(const ManyBodySystem& sys, double r,
                           const OperatorMatrix& a);

// Hyperforce operator attached to observable A; identical action,
// named for its role in the sum rules.
OperatorMatrix hyperforce_density(const ManyBodySystem& sys, double r,
                                  const OperatorMatrix& a);

// Force density -sigma(r) H with its kinetic / interparticle / external
// split. total is the literal sum of the three parts.
struct ForceDensityParts {
  OperatorMatrix total;
  OperatorMatrix kinetic;
  OperatorMatrix interparticle;
  OperatorMatrix external;
};

ForceDensityParts force_density(const ManyBodySystem& sys, double r);

// Field-weighted shift: (-i/2hbar) [A, sum_i (eps(x_i) p_i + p_i eps(x_i))].
// On a grid basis this equals the quadrature sum over sigma_apply sites.
OperatorMatrix sigma_integrated_apply(const ManyBodySystem& sys,
                                      const ShiftField& eps,
                                      const OperatorMatrix& a);

// | tr[rho A sigma(B)] + tr[rho sigma(A) B] | paired-trace defect for the
// anti-self-adjointness of the shifting action under the flat trace; rho
// omitted here, the flat pairing Tr A sigma(B) = -Tr sigma(A) B is exact
// at the matrix level and this returns the scaled residual.
double anti_self_adjoint_defect(const ManyBodySystem& sys, double r,
                                const OperatorMatrix& a,
                                const OperatorMatrix& b);

// Columns span the lowest ceil(dim/2) eigenstates of the Hamiltonian.
// Convergence statements are made relative to this subspace, where the
// basis-truncation corner cannot contaminate the comparison.
struct LowSubspace {
  Matrix basis;
};

LowSubspace low_subspace(const ManyBodySystem& sys);

// Keep a fixed number of low eigenstates; needed when residuals at
// different truncations must be compared over the same subspace.
// keep <= 0 or keep > dim falls back to ceil(dim/2).
LowSubspace low_subspace(const ManyBodySystem& sys, Index keep);

// max_abs(Q (lhs - rhs) Q) / max(1, max_abs(Q lhs Q), max_abs(Q rhs Q))
// with Q the low-subspace compression.
double projected_residual(const LowSubspace& q, const OperatorMatrix& lhs,
                          const OperatorMatrix& rhs);

// [sigma(r), sigma(r')] A versus the discrete delta-prime coefficient
// times (sigma(r) + sigma(r')) A. Grid bases only; r = r' returns the
// projected residual of the commutator against zero.
double check_sigma_commutator(const ManyBodySystem& sys, const LowSubspace& q,
                              double r, double rp, const OperatorMatrix& a);

// [Sigma[e1], Sigma[e2]] A versus Sigma[e1 e2' - e2 e1'] A.
double check_lie_algebra(const ManyBodySystem& sys, const LowSubspace& q,
                         const ShiftField& e1, const ShiftField& e2,
                         const OperatorMatrix& a);

// Sigma[eps] acting on total position and total momentum against the
// canonical closed forms eps(x) and -(eps' p + p eps')/2.
struct CanonicalShiftResiduals {
  double position;
  double momentum;
};

CanonicalShiftResiduals check_canonical_shift(const ManyBodySystem& sys,
                                              const LowSubspace& q,
                                              const ShiftField& eps);

// sigma(r) applied to total position against the density operator at r.
double check_density_from_shift(const ManyBodySystem& sys,
                                const LowSubspace& q, double r);

// External force density against -rho(r) dv(r) with dv a central
// difference of the external potential at the grid spacing.
double check_external_force_gradient(const ManyBodySystem& sys,
                                     const LowSubspace& q,
                                     const ScalarField& v_ext, double r);

}  // namespace qgauge
