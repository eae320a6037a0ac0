#include "qgauge/random.hpp"

#include <cmath>

namespace qgauge {

double GaussianSource::normal() {
  if (have_spare_) {
    have_spare_ = false;
    return spare_;
  }
  // Draw u1 in (0,1], u2 in [0,1).
  double u1, u2;
  do {
    u1 = std::ldexp(static_cast<double>(rng_() >> 11), -53);
  } while (u1 <= 0.0);
  u2 = std::ldexp(static_cast<double>(rng_() >> 11), -53);
  double radius = std::sqrt(-2.0 * std::log(u1));
  double angle = 2.0 * M_PI * u2;
  spare_ = radius * std::sin(angle);
  have_spare_ = true;
  return radius * std::cos(angle);
}

Complex GaussianSource::complex_normal() {
  double re = normal();
  double im = normal();
  return Complex(re, im) * M_SQRT1_2;
}

OperatorMatrix random_matrix(Index dim, std::uint64_t seed, double scale) {
  GaussianSource src(seed);
  Matrix g(dim, dim);
  for (Index j = 0; j < dim; ++j)
    for (Index i = 0; i < dim; ++i) g(i, j) = scale * src.complex_normal();
  return OperatorMatrix(std::move(g), false);
}

OperatorMatrix random_hermitian(Index dim, std::uint64_t seed, double scale) {
  OperatorMatrix g = random_matrix(dim, seed, scale);
  Matrix h = 0.5 * (g.entries + g.entries.adjoint());
  return OperatorMatrix(std::move(h), true);
}

Matrix random_unitary(Index dim, std::uint64_t seed) {
  OperatorMatrix g = random_matrix(dim, seed);
  Eigen::HouseholderQR<Matrix> qr(g.entries);
  Matrix q = qr.householderQ();
  // Fix the phase of each column so the result is seed-stable.
  Matrix r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (Index j = 0; j < dim; ++j) {
    Complex d = r(j, j);
    if (std::abs(d) > 0.0) q.col(j) *= d / std::abs(d);
  }
  return q;
}

}  // namespace qgauge
