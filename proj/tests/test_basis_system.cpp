#include <cmath>
#include <stdexcept>

#include "doctest.h"
#include "qgauge/basis.hpp"
#include "qgauge/spectral.hpp"
#include "qgauge/system.hpp"

using namespace qgauge;

namespace {

BasisSpec oscillator_spec(int n_max, double omega = 1.0, double hbar = 1.0,
                          double mass = 1.0) {
  BasisSpec spec;
  spec.constants.hbar = hbar;
  spec.constants.mass = mass;
  OscillatorSpec o;
  o.n_max = n_max;
  o.omega = omega;
  spec.kind = o;
  return spec;
}

BasisSpec grid_spec(int sites, double length,
                    Boundary boundary = Boundary::periodic,
                    MomentumScheme scheme = MomentumScheme::spectral) {
  BasisSpec spec;
  GridSpec g;
  g.sites = sites;
  g.length = length;
  g.boundary = boundary;
  g.scheme = scheme;
  spec.kind = g;
  return spec;
}

}  // namespace

TEST_CASE("oscillator position matrix element between the lowest states") {
  for (auto [hbar, mass, omega] :
       {std::array<double, 3>{1.0, 1.0, 1.0}, {2.0, 3.0, 1.5}}) {
    BasisSpec spec = oscillator_spec(10, omega, hbar, mass);
    SingleParticleOps ops = build_single_particle(spec);
    const double expected = std::sqrt(hbar / (2.0 * mass * omega));
    CHECK(std::abs(ops.x(0, 1) - expected) <= 1e-14 * expected);
    CHECK(std::abs(ops.x(1, 0) - expected) <= 1e-14 * expected);
  }
}

TEST_CASE("truncated canonical commutator deviates only in the top state") {
  const int n_max = 12;
  const double hbar = 0.7;
  BasisSpec spec = oscillator_spec(n_max, 1.0, hbar);
  SingleParticleOps ops = build_single_particle(spec);
  Matrix expected =
      Complex(0, 1) * hbar * Matrix::Identity(n_max + 1, n_max + 1);
  expected(n_max, n_max) -= Complex(0, 1) * hbar * double(n_max + 1);
  const Matrix comm = ops.x * ops.p - ops.p * ops.x;
  CHECK(max_abs(Matrix(comm - expected)) <= 1e-12 * hbar * double(n_max + 1));
}

TEST_CASE("periodic spectral momentum carries the discrete plane-wave values") {
  const int m = 32;
  const double length = 10.0;
  const double hbar = 1.0;
  BasisSpec spec = grid_spec(m, length);
  SingleParticleOps ops = build_single_particle(spec);
  SpectralDecomposition d =
      spectral_decompose(OperatorMatrix(ops.p, true));
  for (int k = 0; k < m; ++k) {
    const double expected = 2.0 * M_PI * hbar * (k - m / 2) / length;
    CHECK(std::abs(d.eigenvalues(k) - expected) <= 1e-10 * m);
  }
}

TEST_CASE("harmonic spectrum matches the ladder below the truncation tail") {
  BasisSpec spec = oscillator_spec(60);
  ManyBodySystem sys = build_many_body(spec, 1, Statistics::distinguishable,
                                       {harmonic_potential(spec.constants, 1.0),
                                        nullptr});
  SpectralDecomposition d = spectral_decompose(sys.hamiltonian());
  for (int n = 0; n < 10; ++n)
    CHECK(std::abs(d.eigenvalues(n) - (n + 0.5)) <= 1e-10);
}

TEST_CASE("pair sector dimensions follow the symmetric and antisymmetric counts") {
  BasisSpec spec = grid_spec(16, 6.4);
  SystemOptions opt;
  ManyBodySystem bosons = build_many_body(spec, 2, Statistics::boson, opt);
  ManyBodySystem fermions = build_many_body(spec, 2, Statistics::fermion, opt);
  ManyBodySystem pairs =
      build_many_body(spec, 2, Statistics::distinguishable, opt);
  CHECK(bosons.dim() == 136);
  CHECK(fermions.dim() == 120);
  CHECK(pairs.dim() == 256);
  CHECK(bosons.projector_gram_defect() <= 1e-12);
  CHECK(fermions.projector_gram_defect() <= 1e-12);
}

TEST_CASE("grid density operators sum to the particle number") {
  BasisSpec spec = grid_spec(24, 9.0);
  for (int n : {1, 2}) {
    ManyBodySystem sys = build_many_body(
        spec, n, n == 2 ? Statistics::boson : Statistics::distinguishable, {});
    Matrix sum = Matrix::Zero(sys.dim(), sys.dim());
    for (double r : sys.eval_points())
      sum += sys.eval_weight() * sys.density_operator(r).entries;
    Matrix expected = double(n) * Matrix::Identity(sys.dim(), sys.dim());
    CHECK(max_abs(Matrix(sum - expected)) <= 1e-12 * n);
  }
}

TEST_CASE("oscillator ground-state density at the origin") {
  BasisSpec spec = oscillator_spec(40, 2.0, 1.0, 1.5);
  ManyBodySystem sys = build_many_body(spec, 1, Statistics::distinguishable,
                                       {harmonic_potential(spec.constants, 2.0),
                                        nullptr});
  // |phi_0(0)|^2 for the trap ground state.
  const double expected = std::sqrt(1.5 * 2.0 / M_PI);
  const Complex got = sys.density_operator(0.0).entries(0, 0);
  CHECK(std::abs(got - Complex(expected)) <= 1e-12 * expected);
}

TEST_CASE("current operators are Hermitian and integrate to the momentum") {
  BasisSpec spec = grid_spec(20, 8.0);
  ManyBodySystem sys = build_many_body(spec, 1, Statistics::distinguishable, {});
  Matrix sum = Matrix::Zero(sys.dim(), sys.dim());
  for (double r : sys.eval_points()) {
    CHECK(hermiticity_defect(sys.current_operator(r)) <= 1e-12);
    sum += sys.eval_weight() * sys.current_operator(r).entries;
  }
  CHECK(max_abs(Matrix(sum - sys.sum_p().entries)) <=
        1e-12 * max_abs(sys.sum_p()));
}

TEST_CASE("stationary real wavefunctions carry no current") {
  BasisSpec spec = oscillator_spec(50);
  ManyBodySystem sys = build_many_body(spec, 1, Statistics::distinguishable,
                                       {harmonic_potential(spec.constants, 1.0),
                                        nullptr});
  SpectralDecomposition d = spectral_decompose(sys.hamiltonian());
  const Eigen::VectorXcd ground = d.eigenvectors.col(0);
  for (double r : {-1.0, 0.0, 0.7, 2.3}) {
    const Complex j =
        ground.adjoint() * sys.current_operator(r).entries * ground;
    CHECK(std::abs(j) <= 1e-10);
  }
}

TEST_CASE("hamiltonian splits exactly into its three parts") {
  BasisSpec spec = grid_spec(12, 5.0);
  SystemOptions opt;
  opt.v_ext = harmonic_potential(spec.constants, 1.0);
  opt.u_pair = gaussian_pair_potential(0.8, 0.7);
  ManyBodySystem sys = build_many_body(spec, 2, Statistics::boson, opt);
  Matrix sum = sys.kinetic().entries + sys.interparticle().entries +
               sys.external().entries;
  CHECK(max_abs(Matrix(sum - sys.hamiltonian().entries)) == 0.0);
}

TEST_CASE("evaluation points reject positions off the set") {
  BasisSpec spec = grid_spec(16, 8.0);
  ManyBodySystem sys = build_many_body(spec, 1, Statistics::distinguishable, {});
  CHECK_THROWS_AS(sys.density_operator(0.123456), std::invalid_argument);
}

TEST_CASE("hard walls require the difference scheme") {
  BasisSpec bad = grid_spec(16, 8.0, Boundary::hard_wall,
                            MomentumScheme::spectral);
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  BasisSpec good = grid_spec(16, 8.0, Boundary::hard_wall,
                             MomentumScheme::central_difference);
  CHECK_NOTHROW(good.validate());
}

TEST_CASE("lowest Hermite functions at the origin") {
  std::vector<double> h = hermite_functions(3, 0.0);
  CHECK(h[0] == doctest::Approx(std::pow(M_PI, -0.25)).epsilon(1e-14));
  CHECK(h[1] == 0.0);
  // h_2(0) = -1/sqrt(2) * pi^{-1/4}
  CHECK(h[2] ==
        doctest::Approx(-std::pow(M_PI, -0.25) / std::sqrt(2.0)).epsilon(1e-13));
}

TEST_CASE("asymmetric pair potentials are rejected for identical particles") {
  BasisSpec spec = grid_spec(8, 4.0);
  SystemOptions opt;
  opt.u_pair = [](double a, double b) { return a - b; };
  CHECK_THROWS_AS(build_many_body(spec, 2, Statistics::boson, opt),
                  std::invalid_argument);
}

TEST_CASE("empty sector is one dimensional with zero energy") {
  BasisSpec spec = grid_spec(8, 4.0);
  ManyBodySystem sys = build_many_body(spec, 0, Statistics::boson, {});
  CHECK(sys.dim() == 1);
  CHECK(max_abs(sys.hamiltonian()) == 0.0);
}
