#pragma once

// Shared eigenbasis accumulation helpers for the rule evaluators.
// Internal to the library; not installed.

#include <cmath>
#include <limits>

#include "qgauge/thermal.hpp"

namespace qgauge::internal {

using Eigen::VectorXcd;
using Eigen::VectorXd;

// diag(a b) without forming the product, O(d^2).
inline VectorXcd product_diagonal(const Matrix& a, const Matrix& b) {
  return a.cwiseProduct(b.transpose()).rowwise().sum();
}

inline VectorXd abs_product_diagonal(const Matrix& a, const Matrix& b) {
  return a.cwiseAbs().cwiseProduct(b.transpose().cwiseAbs()).rowwise().sum();
}

inline Complex weighted_sum(const VectorXd& w, const VectorXcd& d) {
  Complex acc = 0.0;
  for (Index n = 0; n < w.size(); ++n) acc += w(n) * d(n);
  return acc;
}

inline double weighted_sum(const VectorXd& w, const VectorXd& d) {
  double acc = 0.0;
  for (Index n = 0; n < w.size(); ++n) acc += w(n) * d(n);
  return acc;
}

// Mean and total variation of (i sign/hbar)[X, J] in the eigenbasis
// under the shifted weights; accumulated, not normalised.
inline void accumulate_commutator_mean(double hbar, double sign,
                                       const VectorXd& w, const Matrix& xt,
                                       const Matrix& jt, Complex& mean,
                                       double& tv) {
  const VectorXcd dp = product_diagonal(xt, jt);
  const VectorXcd dq = product_diagonal(jt, xt);
  mean +=
      Complex(0.0, sign / hbar) * (weighted_sum(w, dp) - weighted_sum(w, dq));
  tv += (weighted_sum(w, abs_product_diagonal(xt, jt)) +
         weighted_sum(w, abs_product_diagonal(jt, xt))) /
        hbar;
}

// Force matrix from eigenvalue differences, the kernel-route form of
// (i/hbar)[H, J].
inline Matrix force_from_eigenvalues(double hbar, const RealVector& e,
                                     const Matrix& jt) {
  Matrix f(jt.rows(), jt.cols());
  for (Index n = 0; n < jt.rows(); ++n) {
    for (Index m = 0; m < jt.cols(); ++m) {
      f(n, m) = Complex(0.0, (e(n) - e(m)) / hbar) * jt(n, m);
    }
  }
  return f;
}

// sum conj(a)_{nm} b_{nm} K(n,m) with the shifted pair weight; K > 0,
// so the abs-sum is the total variation of the pairing.
inline void accumulate_pairing(const ThermalState& st,
                               const ThermalState::SectorData& s,
                               const Matrix& at, const Matrix& bt, Complex& acc,
                               double& tv) {
  const RealVector& e = s.dec.eigenvalues;
  for (Index n = 0; n < at.rows(); ++n) {
    for (Index m = 0; m < at.cols(); ++m) {
      const double k = thermal_pair_weight(st.beta, e(n), e(m),
                                           s.log_prefactor, st.log_shift);
      const Complex c = std::conj(at(n, m)) * bt(n, m);
      acc += c * k;
      tv += std::abs(c) * k;
    }
  }
}

inline Matrix to_eig(const ThermalState::SectorData& s,
                     const OperatorMatrix& op) {
  return s.dec.eigenvectors.adjoint() * op.entries * s.dec.eigenvectors;
}

inline double max_abs(const Matrix& m) {
  return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff();
}

// The pair kernel is a divided difference of exponentials, so no entry
// exceeds beta times the largest shifted weight.
inline double pair_weight_bound(const ThermalState& st,
                                const ThermalState::SectorData& s) {
  return st.beta * s.weights.maxCoeff();
}

// Row scales compare the residual against the terms that were supposed
// to cancel. At symmetry points every diagonal product can vanish
// identically (a current at a symmetric trap centre couples only states
// of opposite parity while the Hamiltonian parts couple equal parity),
// leaving mean and total variation as pure roundoff; the ratio would
// then compare noise with noise. The product of the factor magnitudes
// that entered the trace is the size the arithmetic actually handled,
// and keeps such structurally empty rows honestly scaled. It is local:
// it tracks the current operator at the evaluation point.

inline double ratio_or_inf(double residual, double scale) {
  if (scale > 0.0) return residual / scale;
  return residual > 0.0 ? std::numeric_limits<double>::infinity() : 0.0;
}

}  // namespace qgauge::internal
