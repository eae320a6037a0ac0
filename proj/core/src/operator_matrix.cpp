#include "qgauge/operator_matrix.hpp"

#include <stdexcept>

namespace qgauge {

OperatorMatrix identity_operator(Index dim) {
  return OperatorMatrix(Matrix::Identity(dim, dim), true);
}

OperatorMatrix zero_operator(Index dim) {
  return OperatorMatrix(Matrix::Zero(dim, dim), true);
}

double max_abs(const Matrix& m) {
  if (m.size() == 0) return 0.0;
  return m.cwiseAbs().maxCoeff();
}

double max_abs(const OperatorMatrix& a) { return max_abs(a.entries); }

double hermiticity_defect(const OperatorMatrix& a) {
  double scale = max_abs(a);
  if (scale == 0.0) return 0.0;
  return max_abs(Matrix(a.entries - a.entries.adjoint())) / scale;
}

bool is_hermitian(const OperatorMatrix& a, double rel_tol) {
  return a.entries.rows() == a.entries.cols() &&
         hermiticity_defect(a) <= rel_tol;
}

void require_square(const OperatorMatrix& a, const std::string& what) {
  if (a.entries.rows() != a.entries.cols())
    throw std::invalid_argument(what + ": matrix is not square (" +
                                std::to_string(a.entries.rows()) + "x" +
                                std::to_string(a.entries.cols()) + ")");
}

void require_hermitian(const OperatorMatrix& a, const std::string& what,
                       double rel_tol) {
  require_square(a, what);
  double defect = hermiticity_defect(a);
  if (defect > rel_tol)
    throw std::invalid_argument(what + ": hermiticity defect " +
                                std::to_string(defect) + " exceeds tolerance " +
                                std::to_string(rel_tol));
}

void require_same_dim(const OperatorMatrix& a, const OperatorMatrix& b,
                      const std::string& what) {
  if (a.entries.rows() != b.entries.rows() ||
      a.entries.cols() != b.entries.cols())
    throw std::invalid_argument(what + ": shape mismatch (" +
                                std::to_string(a.entries.rows()) + "x" +
                                std::to_string(a.entries.cols()) + " vs " +
                                std::to_string(b.entries.rows()) + "x" +
                                std::to_string(b.entries.cols()) + ")");
}

OperatorMatrix adjoint(const OperatorMatrix& a) {
  return OperatorMatrix(a.entries.adjoint(), a.hermitian_hint);
}

OperatorMatrix commutator(const OperatorMatrix& a, const OperatorMatrix& b) {
  require_square(a, "commutator");
  require_same_dim(a, b, "commutator");
  return OperatorMatrix(a.entries * b.entries - b.entries * a.entries, false);
}

OperatorMatrix anticommutator(const OperatorMatrix& a, const OperatorMatrix& b) {
  require_square(a, "anticommutator");
  require_same_dim(a, b, "anticommutator");
  return OperatorMatrix(a.entries * b.entries + b.entries * a.entries, false);
}

double residual_norm(const OperatorMatrix& a, const OperatorMatrix& b) {
  require_same_dim(a, b, "residual_norm");
  return max_abs(Matrix(a.entries - b.entries));
}

OperatorMatrix operator+(const OperatorMatrix& a, const OperatorMatrix& b) {
  require_same_dim(a, b, "operator+");
  return OperatorMatrix(a.entries + b.entries,
                        a.hermitian_hint && b.hermitian_hint);
}

OperatorMatrix operator-(const OperatorMatrix& a, const OperatorMatrix& b) {
  require_same_dim(a, b, "operator-");
  return OperatorMatrix(a.entries - b.entries,
                        a.hermitian_hint && b.hermitian_hint);
}

OperatorMatrix operator*(const OperatorMatrix& a, const OperatorMatrix& b) {
  return OperatorMatrix(a.entries * b.entries, false);
}

OperatorMatrix operator*(Complex c, const OperatorMatrix& a) {
  return OperatorMatrix(c * a.entries, a.hermitian_hint && c.imag() == 0.0);
}

OperatorMatrix operator*(double c, const OperatorMatrix& a) {
  return OperatorMatrix(c * a.entries, a.hermitian_hint);
}

}  // namespace qgauge
