#include "qgauge/basis.hpp"

#include <cmath>
#include <stdexcept>

#include "qgauge/spectral.hpp"

namespace qgauge {

Index BasisSpec::single_particle_dim() const {
  if (is_grid()) return grid().sites;
  return oscillator().n_max + 1;
}

void BasisSpec::validate() const {
  if (!(constants.hbar > 0.0) || !(constants.mass > 0.0))
    throw std::invalid_argument("BasisSpec: hbar and mass must be positive");
  if (is_grid()) {
    const GridSpec& g = grid();
    if (g.sites < 8)
      throw std::invalid_argument("BasisSpec: grid needs at least 8 sites");
    if (!(g.length > 0.0))
      throw std::invalid_argument("BasisSpec: grid length must be positive");
    if (g.scheme == MomentumScheme::spectral) {
      if (g.sites % 2 != 0)
        throw std::invalid_argument(
            "BasisSpec: spectral momentum needs an even site count");
      if (g.boundary == Boundary::hard_wall)
        throw std::invalid_argument(
            "BasisSpec: spectral momentum is only defined on periodic grids; "
            "use central-difference for hard walls");
    }
  } else {
    const OscillatorSpec& o = oscillator();
    if (o.n_max < 8)
      throw std::invalid_argument("BasisSpec: oscillator needs n_max >= 8");
    if (!(o.omega > 0.0))
      throw std::invalid_argument("BasisSpec: oscillator frequency must be positive");
    if (o.eval_count < 2 || !(o.eval_span > 0.0))
      throw std::invalid_argument("BasisSpec: bad oscillator evaluation grid");
  }
}

std::vector<double> hermite_functions(int n_max, double xi) {
  std::vector<double> phi(static_cast<std::size_t>(n_max) + 1);
  double h0 = std::pow(M_PI, -0.25) * std::exp(-0.5 * xi * xi);
  phi[0] = h0;
  if (n_max >= 1) phi[1] = xi * std::sqrt(2.0) * h0;
  for (int n = 1; n < n_max; ++n)
    phi[n + 1] = xi * std::sqrt(2.0 / (n + 1)) * phi[n] -
                 std::sqrt(static_cast<double>(n) / (n + 1)) * phi[n - 1];
  return phi;
}

namespace {

std::vector<double> grid_coordinates(const GridSpec& g) {
  std::vector<double> x(g.sites);
  double h = g.length / g.sites;
  for (int k = 0; k < g.sites; ++k) {
    double offset = (g.boundary == Boundary::periodic) ? 0.0 : 0.5;
    x[k] = -0.5 * g.length + (k + offset) * h;
  }
  return x;
}

Matrix grid_momentum(const GridSpec& g, const Constants& c,
                     const std::vector<double>& coords) {
  int m = g.sites;
  Matrix p = Matrix::Zero(m, m);
  if (g.scheme == MomentumScheme::spectral) {
    // p = sum_j hbar k_j |k_j><k_j| over the principal wavenumbers.
    for (int j = -m / 2; j < m / 2; ++j) {
      double k = 2.0 * M_PI * j / g.length;
      Eigen::VectorXcd v(m);
      for (int n = 0; n < m; ++n)
        v(n) = std::exp(Complex(0.0, k * coords[n])) / std::sqrt(double(m));
      p.noalias() += (c.hbar * k) * v * v.adjoint();
    }
  } else {
    double h = g.length / m;
    Complex a(0.0, -c.hbar / (2.0 * h));
    for (int k = 0; k < m; ++k) {
      int up = k + 1, down = k - 1;
      if (g.boundary == Boundary::periodic) {
        p(k, (up + m) % m) += a;
        p(k, (down + m) % m) -= a;
      } else {
        if (up < m) p(k, up) += a;
        if (down >= 0) p(k, down) -= a;
      }
    }
  }
  return p;
}

}  // namespace

SingleParticleOps build_single_particle(const BasisSpec& spec) {
  spec.validate();
  const Constants& c = spec.constants;
  SingleParticleOps ops;
  if (spec.is_grid()) {
    const GridSpec& g = spec.grid();
    std::vector<double> coords = grid_coordinates(g);
    Matrix x = Matrix::Zero(g.sites, g.sites);
    for (int k = 0; k < g.sites; ++k) x(k, k) = coords[k];
    ops.x = std::move(x);
    ops.p = grid_momentum(g, c, coords);
    ops.x_nodes = Eigen::Map<const RealVector>(coords.data(), g.sites);
    ops.x_vectors = Matrix::Identity(g.sites, g.sites);
    ops.eval_points = coords;
    ops.eval_weight = g.length / g.sites;
  } else {
    const OscillatorSpec& o = spec.oscillator();
    Index dim = o.n_max + 1;
    double lx = std::sqrt(c.hbar / (2.0 * c.mass * o.omega));
    double lp = std::sqrt(c.hbar * c.mass * o.omega / 2.0);
    Matrix x = Matrix::Zero(dim, dim);
    Matrix p = Matrix::Zero(dim, dim);
    for (Index n = 0; n + 1 < dim; ++n) {
      double root = std::sqrt(static_cast<double>(n + 1));
      x(n, n + 1) = lx * root;
      x(n + 1, n) = lx * root;
      p(n + 1, n) = Complex(0.0, lp * root);
      p(n, n + 1) = Complex(0.0, -lp * root);
    }
    ops.x = std::move(x);
    ops.p = std::move(p);
    SpectralDecomposition xdec =
        spectral_decompose(OperatorMatrix(ops.x, true));
    ops.x_nodes = xdec.eigenvalues;
    ops.x_vectors = xdec.eigenvectors;
    double osc_len = std::sqrt(c.hbar / (c.mass * o.omega));
    double span = o.eval_span * osc_len;
    ops.eval_points.resize(o.eval_count);
    double step = 2.0 * span / (o.eval_count - 1);
    for (int i = 0; i < o.eval_count; ++i)
      ops.eval_points[i] = -span + i * step;
    ops.eval_weight = step;
  }
  return ops;
}

Matrix single_particle_density(const BasisSpec& spec, double r) {
  const Constants& c = spec.constants;
  if (spec.is_grid()) {
    const GridSpec& g = spec.grid();
    std::vector<double> coords = grid_coordinates(g);
    double h = g.length / g.sites;
    int hit = -1;
    for (int k = 0; k < g.sites; ++k)
      if (std::abs(coords[k] - r) <= 1e-9 * h) hit = k;
    if (hit < 0)
      throw std::invalid_argument(
          "single_particle_density: r is not a grid point");
    Matrix d = Matrix::Zero(g.sites, g.sites);
    d(hit, hit) = 1.0 / h;
    return d;
  }
  const OscillatorSpec& o = spec.oscillator();
  double inv_len = std::sqrt(c.mass * o.omega / c.hbar);
  std::vector<double> phi = hermite_functions(o.n_max, r * inv_len);
  Index dim = o.n_max + 1;
  Eigen::VectorXd v(dim);
  for (Index n = 0; n < dim; ++n) v(n) = std::sqrt(inv_len) * phi[n];
  Matrix d = (v * v.transpose()).cast<Complex>();
  return d;
}

}  // namespace qgauge
