#pragma once

#include <Eigen/Dense>
#include <complex>
#include <string>

namespace qgauge {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using RealVector = Eigen::VectorXd;
using Index = Eigen::Index;

// Relative tolerance used when an operator claims hermitian_hint.
inline constexpr double kHermTolRel = 1e-12;

// Dense operator on a finite many-body space. The matrix is the
// representation in whatever basis the producing module fixed; all
// norms in this codebase are elementwise max-abs.
struct OperatorMatrix {
  Matrix entries;
  bool hermitian_hint = false;

  OperatorMatrix() = default;
  explicit OperatorMatrix(Matrix m, bool herm = false)
      : entries(std::move(m)), hermitian_hint(herm) {}

  Index dim() const { return entries.rows(); }
};

OperatorMatrix identity_operator(Index dim);
OperatorMatrix zero_operator(Index dim);

double max_abs(const Matrix& m);
double max_abs(const OperatorMatrix& a);

// max|A - A^dagger| relative to max|A|; 0 for the zero matrix.
double hermiticity_defect(const OperatorMatrix& a);
bool is_hermitian(const OperatorMatrix& a, double rel_tol = kHermTolRel);

// Throws std::invalid_argument naming `what` if the defect exceeds rel_tol.
void require_hermitian(const OperatorMatrix& a, const std::string& what,
                       double rel_tol = kHermTolRel);
void require_square(const OperatorMatrix& a, const std::string& what);
void require_same_dim(const OperatorMatrix& a, const OperatorMatrix& b,
                      const std::string& what);

OperatorMatrix adjoint(const OperatorMatrix& a);
OperatorMatrix commutator(const OperatorMatrix& a, const OperatorMatrix& b);
OperatorMatrix anticommutator(const OperatorMatrix& a, const OperatorMatrix& b);

// Elementwise max-abs difference. Shape mismatch is rejected.
double residual_norm(const OperatorMatrix& a, const OperatorMatrix& b);

OperatorMatrix operator+(const OperatorMatrix& a, const OperatorMatrix& b);
OperatorMatrix operator-(const OperatorMatrix& a, const OperatorMatrix& b);
OperatorMatrix operator*(const OperatorMatrix& a, const OperatorMatrix& b);
OperatorMatrix operator*(Complex c, const OperatorMatrix& a);
OperatorMatrix operator*(double c, const OperatorMatrix& a);

}  // namespace qgauge
