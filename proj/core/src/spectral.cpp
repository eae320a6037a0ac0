#include "qgauge/spectral.hpp"

#include <stdexcept>

namespace qgauge {

OperatorMatrix SpectralDecomposition::apply(
    const std::function<Complex(double)>& f) const {
  Eigen::VectorXcd d(eigenvalues.size());
  for (Index i = 0; i < eigenvalues.size(); ++i) d(i) = f(eigenvalues(i));
  Matrix out = eigenvectors * d.asDiagonal() * eigenvectors.adjoint();
  bool real_diag = true;
  for (Index i = 0; i < d.size(); ++i)
    if (d(i).imag() != 0.0) real_diag = false;
  return OperatorMatrix(std::move(out), real_diag);
}

OperatorMatrix SpectralDecomposition::reconstruct() const {
  return OperatorMatrix(
      eigenvectors * eigenvalues.asDiagonal() * eigenvectors.adjoint(), true);
}

Matrix SpectralDecomposition::to_eigenbasis(const Matrix& m) const {
  return eigenvectors.adjoint() * m * eigenvectors;
}

Matrix SpectralDecomposition::from_eigenbasis(const Matrix& m) const {
  return eigenvectors * m * eigenvectors.adjoint();
}

double SpectralDecomposition::unitarity_residual() const {
  Matrix gram = eigenvectors.adjoint() * eigenvectors;
  return max_abs(Matrix(gram - Matrix::Identity(dim(), dim())));
}

double SpectralDecomposition::reconstruction_residual(
    const OperatorMatrix& h) const {
  return residual_norm(reconstruct(), h);
}

SpectralDecomposition spectral_decompose(const OperatorMatrix& h,
                                         const SpectralOptions& opt) {
  require_square(h, "spectral_decompose");
  if (opt.validate) {
    double defect = hermiticity_defect(h);
    if (defect > opt.input_tol_rel)
      throw std::invalid_argument(
          "spectral_decompose: input asymmetry " + std::to_string(defect) +
          " exceeds tolerance " + std::to_string(opt.input_tol_rel));
  }
  Eigen::SelfAdjointEigenSolver<Matrix> solver(h.entries);
  if (solver.info() != Eigen::Success)
    throw std::runtime_error("spectral_decompose: eigensolver did not converge");
  SpectralDecomposition dec;
  dec.eigenvalues = solver.eigenvalues();
  dec.eigenvectors = solver.eigenvectors();
  return dec;
}

}  // namespace qgauge
