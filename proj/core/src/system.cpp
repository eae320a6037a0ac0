#include "qgauge/system.hpp"

#include <cmath>
#include <stdexcept>

namespace qgauge {

ScalarField harmonic_potential(const Constants& c, double omega) {
  double k = 0.5 * c.mass * omega * omega;
  return [k](double x) { return k * x * x; };
}

ScalarField tilted_potential(const Constants& c, double omega, double slope) {
  double k = 0.5 * c.mass * omega * omega;
  return [k, slope](double x) { return k * x * x + slope * x; };
}

ScalarField tabulated_potential(std::vector<double> xs, std::vector<double> vs) {
  if (xs.size() != vs.size() || xs.size() < 2)
    throw std::invalid_argument("tabulated_potential: need matching tables of length >= 2");
  for (std::size_t i = 1; i < xs.size(); ++i)
    if (!(xs[i] > xs[i - 1]))
      throw std::invalid_argument("tabulated_potential: x values must increase");
  return [xs = std::move(xs), vs = std::move(vs)](double x) {
    if (x <= xs.front()) return vs.front();
    if (x >= xs.back()) return vs.back();
    std::size_t hi = 1;
    while (xs[hi] < x) ++hi;
    double t = (x - xs[hi - 1]) / (xs[hi] - xs[hi - 1]);
    return (1.0 - t) * vs[hi - 1] + t * vs[hi];
  };
}

PairField gaussian_pair_potential(double u0, double width) {
  if (!(width > 0.0))
    throw std::invalid_argument("gaussian_pair_potential: width must be positive");
  double inv2w2 = 1.0 / (2.0 * width * width);
  return [u0, inv2w2](double a, double b) {
    double d = a - b;
    return u0 * std::exp(-d * d * inv2w2);
  };
}

Matrix kronecker(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Index i = 0; i < a.rows(); ++i)
    for (Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

namespace {

Matrix apply_on_x_spectrum(const SingleParticleOps& sp, const ScalarField& f) {
  Eigen::VectorXcd d(sp.x_nodes.size());
  for (Index i = 0; i < sp.x_nodes.size(); ++i) d(i) = f(sp.x_nodes(i));
  return sp.x_vectors * d.asDiagonal() * sp.x_vectors.adjoint();
}

// Squaring the central-difference momentum would couple only
// next-nearest sites, splitting the lattice into two noninteracting
// sublattices whose spectrum doubles up with checkerboard modes. The
// standard second-difference Laplacian keeps the chain connected, so
// that scheme gets its own kinetic stencil.
Matrix single_particle_kinetic(const BasisSpec& spec,
                               const SingleParticleOps& sp) {
  const Constants& c = spec.constants;
  if (spec.is_grid() &&
      spec.grid().scheme == MomentumScheme::central_difference) {
    const GridSpec& g = spec.grid();
    const int m = g.sites;
    const double h = g.length / m;
    const double t = c.hbar * c.hbar / (2.0 * c.mass * h * h);
    Matrix kin = Matrix::Zero(m, m);
    for (int k = 0; k < m; ++k) {
      kin(k, k) = 2.0 * t;
      const int up = k + 1, down = k - 1;
      if (g.boundary == Boundary::periodic) {
        kin(k, (up + m) % m) -= t;
        kin(k, (down + m) % m) -= t;
      } else {
        if (up < m) kin(k, up) -= t;
        if (down >= 0) kin(k, down) -= t;
      }
    }
    return kin;
  }
  return sp.p * sp.p / (2.0 * c.mass);
}

Matrix pair_isometry(Index d1, Statistics stats) {
  if (stats == Statistics::distinguishable)
    return Matrix::Identity(d1 * d1, d1 * d1);
  const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
  Index cols = (stats == Statistics::boson) ? d1 * (d1 + 1) / 2
                                            : d1 * (d1 - 1) / 2;
  Matrix v = Matrix::Zero(d1 * d1, cols);
  Index c = 0;
  for (Index k = 0; k < d1; ++k) {
    if (stats == Statistics::boson) v(k * d1 + k, c++) = 1.0;
    for (Index l = k + 1; l < d1; ++l) {
      v(k * d1 + l, c) = inv_sqrt2;
      v(l * d1 + k, c) = (stats == Statistics::boson) ? inv_sqrt2 : -inv_sqrt2;
      ++c;
    }
  }
  return v;
}

}  // namespace

std::size_t ManyBodySystem::eval_index(double r) const {
  double h = eval_weight_ > 0.0 ? eval_weight_ : 1.0;
  for (std::size_t i = 0; i < eval_points_.size(); ++i)
    if (std::abs(eval_points_[i] - r) <= 1e-9 * h) return i;
  throw std::invalid_argument("ManyBodySystem: r = " + std::to_string(r) +
                              " is not an evaluation point");
}

const OperatorMatrix& ManyBodySystem::density_operator(double r) const {
  return density_ops_[eval_index(r)];
}

const OperatorMatrix& ManyBodySystem::current_operator(double r) const {
  return current_ops_[eval_index(r)];
}

double ManyBodySystem::projector_gram_defect() const {
  Matrix gram = isometry_.adjoint() * isometry_;
  return max_abs(Matrix(gram - Matrix::Identity(gram.rows(), gram.cols())));
}

OperatorMatrix ManyBodySystem::position_observable(const ScalarField& f) const {
  if (particles_ == 0) return zero_operator(1);
  Matrix f1 = apply_on_x_spectrum(sp_, f);
  if (particles_ == 1) return OperatorMatrix(std::move(f1), true);
  Index d1 = f1.rows();
  Matrix eye = Matrix::Identity(d1, d1);
  Matrix full = kronecker(f1, eye) + kronecker(eye, f1);
  return OperatorMatrix(isometry_.adjoint() * full * isometry_, true);
}

OperatorMatrix ManyBodySystem::weighted_momentum(const ScalarField& f) const {
  if (particles_ == 0) return zero_operator(1);
  Matrix f1 = apply_on_x_spectrum(sp_, f);
  Matrix g1 = f1 * sp_.p + sp_.p * f1;
  if (particles_ == 1) return OperatorMatrix(std::move(g1), true);
  Index d1 = g1.rows();
  Matrix eye = Matrix::Identity(d1, d1);
  Matrix full = kronecker(g1, eye) + kronecker(eye, g1);
  return OperatorMatrix(isometry_.adjoint() * full * isometry_, true);
}

OperatorMatrix ManyBodySystem::hamiltonian_with_external(
    const ScalarField& v) const {
  if (particles_ == 0) return zero_operator(1);
  OperatorMatrix vnew = position_observable(v);
  return OperatorMatrix(kinetic_.entries + interparticle_.entries + vnew.entries,
                        true);
}

ManyBodySystem build_many_body(const BasisSpec& spec, int particles,
                               Statistics stats, const SystemOptions& opt) {
  spec.validate();
  if (particles < 0 || particles > 2)
    throw std::invalid_argument(
        "build_many_body: particle count must be 0, 1 or 2");

  ManyBodySystem sys;
  sys.spec_ = spec;
  sys.particles_ = particles;
  sys.stats_ = stats;
  sys.sp_ = build_single_particle(spec);
  sys.eval_points_ = sys.sp_.eval_points;
  sys.eval_weight_ = sys.sp_.eval_weight;

  const Constants& c = spec.constants;
  Index d1 = sys.sp_.x.rows();
  Matrix t1 = single_particle_kinetic(spec, sys.sp_);
  Matrix v1 = opt.v_ext ? apply_on_x_spectrum(sys.sp_, opt.v_ext)
                        : Matrix::Zero(d1, d1);

  if (particles == 0) {
    sys.isometry_ = Matrix::Identity(1, 1);
    sys.hamiltonian_ = zero_operator(1);
    sys.kinetic_ = zero_operator(1);
    sys.interparticle_ = zero_operator(1);
    sys.external_ = zero_operator(1);
    sys.sum_x_ = zero_operator(1);
    sys.sum_p_ = zero_operator(1);
    sys.density_ops_.assign(sys.eval_points_.size(), zero_operator(1));
    sys.current_ops_.assign(sys.eval_points_.size(), zero_operator(1));
    return sys;
  }

  if (particles == 1) {
    sys.isometry_ = Matrix::Identity(d1, d1);
    sys.kinetic_ = OperatorMatrix(t1, true);
    sys.interparticle_ = zero_operator(d1);
    sys.external_ = OperatorMatrix(v1, true);
    sys.hamiltonian_ = OperatorMatrix(t1 + v1, true);
    sys.sum_x_ = OperatorMatrix(sys.sp_.x, true);
    sys.sum_p_ = OperatorMatrix(sys.sp_.p, true);
    sys.particle_x_ = {sys.sum_x_};
    sys.particle_p_ = {sys.sum_p_};
    sys.density_ops_.reserve(sys.eval_points_.size());
    sys.current_ops_.reserve(sys.eval_points_.size());
    for (double r : sys.eval_points_) {
      Matrix d = single_particle_density(spec, r);
      Matrix j = 0.5 * (sys.sp_.p * d + d * sys.sp_.p);
      sys.density_ops_.emplace_back(std::move(d), true);
      sys.current_ops_.emplace_back(std::move(j), true);
    }
    return sys;
  }

  if (stats != Statistics::distinguishable && opt.u_pair) {
    // Identical particles need an exchange symmetric pair potential.
    for (double a : {-0.7, 0.31, 1.9})
      for (double b : {-1.3, 0.52}) {
        double uab = opt.u_pair(a, b), uba = opt.u_pair(b, a);
        double scale = std::max({std::abs(uab), std::abs(uba), 1.0});
        if (std::abs(uab - uba) > 1e-10 * scale)
          throw std::invalid_argument(
              "build_many_body: pair potential is not symmetric");
      }
  }

  Matrix eye = Matrix::Identity(d1, d1);
  sys.isometry_ = pair_isometry(d1, stats);
  const Matrix& vv = sys.isometry_;
  auto reduce = [&vv](const Matrix& m) -> Matrix {
    return vv.adjoint() * m * vv;
  };

  Matrix t_full = kronecker(t1, eye) + kronecker(eye, t1);
  Matrix v_full = kronecker(v1, eye) + kronecker(eye, v1);
  Matrix u_full = Matrix::Zero(d1 * d1, d1 * d1);
  if (opt.u_pair) {
    // u(x_1, x_2) is diagonal in the product of x eigenbases.
    Eigen::VectorXcd diag(d1 * d1);
    for (Index a = 0; a < d1; ++a)
      for (Index b = 0; b < d1; ++b)
        diag(a * d1 + b) = opt.u_pair(sys.sp_.x_nodes(a), sys.sp_.x_nodes(b));
    Matrix w = kronecker(sys.sp_.x_vectors, sys.sp_.x_vectors);
    u_full = w * diag.asDiagonal() * w.adjoint();
  }

  sys.kinetic_ = OperatorMatrix(reduce(t_full), true);
  sys.interparticle_ = OperatorMatrix(reduce(u_full), true);
  sys.external_ = OperatorMatrix(reduce(v_full), true);
  sys.hamiltonian_ =
      OperatorMatrix(sys.kinetic_.entries + sys.interparticle_.entries +
                         sys.external_.entries,
                     true);

  Matrix x1f = kronecker(sys.sp_.x, eye), x2f = kronecker(eye, sys.sp_.x);
  Matrix p1f = kronecker(sys.sp_.p, eye), p2f = kronecker(eye, sys.sp_.p);
  sys.particle_x_ = {OperatorMatrix(reduce(x1f), true),
                     OperatorMatrix(reduce(x2f), true)};
  sys.particle_p_ = {OperatorMatrix(reduce(p1f), true),
                     OperatorMatrix(reduce(p2f), true)};
  sys.sum_x_ = OperatorMatrix(reduce(Matrix(x1f + x2f)), true);
  sys.sum_p_ = OperatorMatrix(reduce(Matrix(p1f + p2f)), true);

  sys.density_ops_.reserve(sys.eval_points_.size());
  sys.current_ops_.reserve(sys.eval_points_.size());
  for (double r : sys.eval_points_) {
    Matrix d = single_particle_density(spec, r);
    Matrix j = 0.5 * (sys.sp_.p * d + d * sys.sp_.p);
    Matrix d_full = kronecker(d, eye) + kronecker(eye, d);
    Matrix j_full = kronecker(j, eye) + kronecker(eye, j);
    sys.density_ops_.emplace_back(reduce(d_full), true);
    sys.current_ops_.emplace_back(reduce(j_full), true);
  }
  return sys;
}

}  // namespace qgauge
