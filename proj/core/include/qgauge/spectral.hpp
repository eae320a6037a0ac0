#pragma once

#include <functional>

#include "qgauge/operator_matrix.hpp"

namespace qgauge {

// Input asymmetry above this relative level is rejected by
// spectral_decompose when validation is on.
inline constexpr double kSpectralInputTolRel = 1e-10;

// Eigensystem of a Hermitian operator, eigenvalues ascending,
// eigenvector columns orthonormal to 1e-10 in max-abs.
struct SpectralDecomposition {
  RealVector eigenvalues;
  Matrix eigenvectors;

  Index dim() const { return eigenvalues.size(); }

  // U f(diag) U^dagger for a scalar function of the spectrum.
  OperatorMatrix apply(const std::function<Complex(double)>& f) const;
  OperatorMatrix reconstruct() const;

  // Basis change into / out of the eigenbasis.
  Matrix to_eigenbasis(const Matrix& m) const;
  Matrix from_eigenbasis(const Matrix& m) const;

  double unitarity_residual() const;
  double reconstruction_residual(const OperatorMatrix& h) const;
};

struct SpectralOptions {
  bool validate = true;
  double input_tol_rel = kSpectralInputTolRel;
};

// Hermitian eigendecomposition. Rejects non-square or (when validating)
// asymmetric input; throws std::runtime_error on eigensolver failure.
// With validate=false the lower triangle wins, which is what the
// fault-injection path relies on.
SpectralDecomposition spectral_decompose(const OperatorMatrix& h,
                                         const SpectralOptions& opt = {});

}  // namespace qgauge
