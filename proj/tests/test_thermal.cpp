#include <cmath>
#include <vector>

#include <Eigen/Dense>

#include "doctest.h"
#include "qgauge/random.hpp"
#include "qgauge/system.hpp"
#include "qgauge/thermal.hpp"

using namespace qgauge;

namespace {

BasisSpec oscillator_spec(int n_max, double omega = 1.0) {
  BasisSpec spec;
  OscillatorSpec o;
  o.n_max = n_max;
  o.omega = omega;
  spec.kind = o;
  return spec;
}

BasisSpec grid_spec(int sites, double length) {
  BasisSpec spec;
  GridSpec g;
  g.sites = sites;
  g.length = length;
  spec.kind = g;
  return spec;
}

ManyBodySystem trapped_particle(int n_max, double omega = 1.0) {
  BasisSpec spec = oscillator_spec(n_max, omega);
  return build_many_body(spec, 1, Statistics::distinguishable,
                         {harmonic_potential(spec.constants, omega), nullptr});
}

// Gauss-Legendre nodes and weights on [-1, 1] by Newton iteration on
// the recurrence. Plenty of nodes so the comparison below is limited
// by the production code, not by this quadrature.
void gauss_legendre(int n, std::vector<double>& x, std::vector<double>& w) {
  x.assign(n, 0.0);
  w.assign(n, 0.0);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double z = std::cos(M_PI * (i + 0.75) / (n + 0.5));
    double pp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = 0.0;
      for (int j = 0; j < n; ++j) {
        double p2 = p1;
        p1 = p0;
        p0 = ((2.0 * j + 1.0) * z * p1 - j * p2) / (j + 1.0);
      }
      pp = n * (z * p0 - p1) / (z * z - 1.0);
      double dz = p0 / pp;
      z -= dz;
      if (std::abs(dz) < 1e-15) break;
    }
    x[i] = -z;
    x[n - 1 - i] = z;
    w[i] = 2.0 / ((1.0 - z * z) * pp * pp);
    w[n - 1 - i] = w[i];
  }
}

// Direct quadrature of the averaged imaginary-time overlap
// (1/beta) int_0^beta <e^{tH} A^+ e^{-tH} B> dt from scratch: its own
// eigensolve, shifted weights, and the combined exponent
// -(beta - t)(E_m - E_0) - t(E_n - E_0), which never exceeds zero.
Complex quadrature_product(const OperatorMatrix& h, double beta,
                           const OperatorMatrix& a, const OperatorMatrix& b) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(h.entries);
  const Eigen::VectorXd e = es.eigenvalues();
  const Matrix u = es.eigenvectors();
  const double e0 = e.minCoeff();
  double z = 0.0;
  for (Index m = 0; m < e.size(); ++m) z += std::exp(-beta * (e(m) - e0));
  const Matrix at = u.adjoint() * a.entries.adjoint() * u;
  const Matrix bt = u.adjoint() * b.entries * u;

  std::vector<double> xs, ws;
  gauss_legendre(200, xs, ws);
  Complex acc = 0.0;
  for (std::size_t q = 0; q < xs.size(); ++q) {
    const double t = 0.5 * beta * (xs[q] + 1.0);
    Complex k = 0.0;
    for (Index m = 0; m < e.size(); ++m)
      for (Index n = 0; n < e.size(); ++n) {
        const double expo =
            -(beta - t) * (e(m) - e0) - t * (e(n) - e0);
        k += std::exp(expo) * at(m, n) * bt(n, m);
      }
    acc += ws[q] * 0.5 * beta * k;
  }
  return acc / (beta * z);
}

// Spectrum with controlled gaps around the near-degenerate floor,
// dressed by a random unitary.
OperatorMatrix gapped_hamiltonian(double gap_scale, int seed) {
  const Index d = 32;
  Eigen::VectorXd e(d);
  for (Index i = 0; i < d; ++i) e(i) = 0.37 * double(i);
  e(5) = e(4) + 0.1 * gap_scale;
  e(11) = e(10) + gap_scale;
  e(21) = e(20) + 10.0 * gap_scale;
  e(31) = e(30);  // exactly coincident pair
  const Matrix u = random_unitary(d, seed);
  Matrix m = u * e.asDiagonal() * u.adjoint();
  Matrix sym = 0.5 * (m + m.adjoint());
  return OperatorMatrix(sym, true);
}

}  // namespace

TEST_CASE("harmonic partition function matches the geometric series") {
  ManyBodySystem sys = trapped_particle(120);
  for (double beta : {0.5, 1.0, 3.0}) {
    ThermalState st = make_thermal_state(sys, beta);
    const double exact =
        -0.5 * beta - std::log(1.0 - std::exp(-beta));
    CHECK(std::abs(st.log_partition - exact) <= 1e-11);
    const double f_exact = 0.5 + std::log(1.0 - std::exp(-beta)) / beta;
    CHECK(std::abs(st.free_energy() - f_exact) <= 1e-11);
  }
}

TEST_CASE("harmonic thermal energy matches the closed form") {
  ManyBodySystem sys = trapped_particle(120);
  for (double beta : {0.5, 1.0, 2.0, 6.0}) {
    ThermalState st = make_thermal_state(sys, beta);
    const Complex got = thermal_average(st, sys.hamiltonian());
    const double exact = 0.5 / std::tanh(0.5 * beta);
    CHECK(std::abs(got.imag()) <= 1e-12);
    CHECK(std::abs(got.real() - exact) <= 1e-10);
  }
}

TEST_CASE("two-level occupation follows the logistic weight") {
  ManyBodySystem sys =
      build_many_body(grid_spec(8, 4.0), 1, Statistics::distinguishable, {});
  const double delta = 0.8, beta = 1.7;
  // Only the two lowest levels are thermally reachable.
  Matrix h = 100.0 * Matrix::Identity(8, 8);
  h(0, 0) = 0.0;
  h(1, 1) = delta;
  ThermalState st =
      make_thermal_state_with_hamiltonian(sys, OperatorMatrix(h, true), beta);
  CHECK(std::abs(st.log_partition - std::log(1.0 + std::exp(-beta * delta))) <=
        1e-13);
  const Complex mean = thermal_average(st, OperatorMatrix(h, true));
  CHECK(mean.real() ==
        doctest::Approx(delta / (1.0 + std::exp(beta * delta))).epsilon(1e-12));
}

TEST_CASE("average of the identity is one") {
  ManyBodySystem sys = trapped_particle(20);
  ThermalState st = make_thermal_state(sys, 1.3);
  const Complex one = thermal_average(st, identity_operator(sys.dim()));
  CHECK(std::abs(one - Complex(1.0)) <= 1e-13);
}

TEST_CASE("deep negative chemical potential empties the trap") {
  BasisSpec spec = grid_spec(8, 4.0);
  SystemOptions opt;
  ManyBodySystem s0 = build_many_body(spec, 0, Statistics::boson, opt);
  ManyBodySystem s1 = build_many_body(spec, 1, Statistics::boson, opt);
  ManyBodySystem s2 = build_many_body(spec, 2, Statistics::boson, opt);
  ThermalState st = make_grand_state({&s0, &s1, &s2}, 1.0, -30.0);
  std::vector<OperatorMatrix> number{0.0 * identity_operator(s0.dim()),
                                     identity_operator(s1.dim()),
                                     2.0 * identity_operator(s2.dim())};
  const Complex n = thermal_average(st, number);
  CHECK(std::abs(n) <= 1e-9);
}

TEST_CASE("single-sector grand state reproduces the canonical averages") {
  BasisSpec spec = grid_spec(10, 5.0);
  SystemOptions opt;
  opt.v_ext = harmonic_potential(spec.constants, 1.0);
  ManyBodySystem sys = build_many_body(spec, 1, Statistics::boson, opt);
  const double beta = 1.1;
  ThermalState canonical = make_thermal_state(sys, beta);
  ThermalState grand = make_grand_state({&sys}, beta, 0.7);
  const Complex a = thermal_average(canonical, sys.hamiltonian());
  const Complex b = thermal_average(grand, {sys.hamiltonian()});
  CHECK(std::abs(a - b) <= 1e-12 * std::max(1.0, std::abs(a)));
}

TEST_CASE("pair weight matches the stable difference quotient at all gaps") {
  const double beta = 2.3, em = 0.9, log_pref = 0.4, log_shift = -0.6;
  for (double gap : {1e-14, 1e-12, 1e-10, 1e-8, 1e-6, 1e-4, 1e-2, 1.0, 5.0}) {
    const double en = em + gap;
    const double got = thermal_pair_weight(beta, em, en, log_pref, log_shift);
    // (w(en) - w(em)) / (em - en) with the cancellation handled by expm1.
    const double oracle = std::exp(-beta * em + log_pref - log_shift) *
                          std::expm1(-beta * gap) / (-gap);
    CHECK(std::abs(got - oracle) <= 1e-12 * std::abs(oracle));
  }
  // Exactly coincident levels carry beta times the weight itself.
  const double coincident =
      thermal_pair_weight(beta, em, em, log_pref, log_shift);
  const double expected = beta * std::exp(-beta * em + log_pref - log_shift);
  CHECK(std::abs(coincident - expected) <= 1e-13 * expected);
}

TEST_CASE("time-averaged product matches direct quadrature on random pairs") {
  BasisSpec spec = grid_spec(32, 12.0);
  ManyBodySystem sys = build_many_body(spec, 1, Statistics::distinguishable, {});
  int seed = 100;
  for (double beta : {0.1, 1.0, 10.0}) {
    for (int rep = 0; rep < 2; ++rep) {
      const OperatorMatrix h = random_hermitian(32, ++seed);
      const OperatorMatrix a = random_hermitian(32, ++seed);
      const OperatorMatrix b = random_hermitian(32, ++seed);
      ThermalState st = make_thermal_state_with_hamiltonian(sys, h, beta);
      const Complex got = mori_product(st, a, b);
      const Complex oracle = quadrature_product(h, beta, a, b);
      CHECK(std::abs(got - oracle) <= 1e-9 * std::max(1.0, std::abs(oracle)));
    }
  }
}

TEST_CASE("time-averaged product is continuous across near degeneracy") {
  BasisSpec spec = grid_spec(32, 12.0);
  ManyBodySystem sys = build_many_body(spec, 1, Statistics::distinguishable, {});
  int seed = 300;
  for (double beta : {0.1, 1.0, 10.0}) {
    const OperatorMatrix h = gapped_hamiltonian(1e-8, ++seed);
    const OperatorMatrix a = random_hermitian(32, ++seed);
    const OperatorMatrix b = random_hermitian(32, ++seed);
    ThermalState st = make_thermal_state_with_hamiltonian(sys, h, beta);
    const Complex got = mori_product(st, a, b);
    const Complex oracle = quadrature_product(h, beta, a, b);
    CHECK(std::abs(got - oracle) <= 1e-9 * std::max(1.0, std::abs(oracle)));
  }
}

TEST_CASE("product against the identity reduces to the plain average") {
  ManyBodySystem sys = trapped_particle(30);
  ThermalState st = make_thermal_state(sys, 0.9);
  const OperatorMatrix b = random_hermitian(sys.dim(), 77);
  const Complex lhs = mori_product(st, identity_operator(sys.dim()), b);
  const Complex rhs = thermal_average(st, b);
  CHECK(std::abs(lhs - rhs) <= 1e-12 * std::max(1.0, std::abs(rhs)));
}

TEST_CASE("conserved observables drop out of the time average") {
  ManyBodySystem sys = trapped_particle(30);
  ThermalState st = make_thermal_state(sys, 1.4);
  // A = H commutes with H, so the product is the static correlation.
  const OperatorMatrix b = random_hermitian(sys.dim(), 78);
  const Complex lhs = mori_product(st, sys.hamiltonian(), b);
  OperatorMatrix hb = sys.hamiltonian() * b;
  const Complex rhs = thermal_average(st, hb);
  CHECK(std::abs(lhs - rhs) <= 1e-11 * std::max(1.0, std::abs(rhs)));
}

TEST_CASE("covariance against the identity vanishes on both sides") {
  ManyBodySystem sys = trapped_particle(25);
  ThermalState st = make_thermal_state(sys, 2.0);
  const OperatorMatrix a = random_hermitian(sys.dim(), 81);
  const OperatorMatrix one = identity_operator(sys.dim());
  CHECK(std::abs(mori_covariance(st, one, a)) <= 1e-12);
  CHECK(std::abs(mori_covariance(st, a, one)) <= 1e-12);
}

TEST_CASE("energy autocovariance equals the curvature of the log partition") {
  ManyBodySystem sys = trapped_particle(80);
  const double beta = 1.0;
  ThermalState st = make_thermal_state(sys, beta);
  const Complex got = mori_covariance(st, sys.hamiltonian(), sys.hamiltonian());
  const double s = std::sinh(0.5 * beta);
  const double exact = 0.25 / (s * s);
  CHECK(std::abs(got.imag()) <= 1e-12);
  CHECK(std::abs(got.real() - exact) <= 1e-9);
}

TEST_CASE("product conjugates under swapping its arguments") {
  ManyBodySystem sys = trapped_particle(24);
  ThermalState st = make_thermal_state(sys, 1.7);
  const OperatorMatrix a = random_matrix(sys.dim(), 91);
  const OperatorMatrix b = random_matrix(sys.dim(), 92);
  const Complex lhs = mori_product(st, a, b);
  const Complex rhs = std::conj(mori_product(st, b, a));
  CHECK(std::abs(lhs - rhs) <= 1e-12 * std::max(1.0, std::abs(lhs)));
}

TEST_CASE("self products are nonnegative") {
  BasisSpec spec = grid_spec(24, 9.0);
  ManyBodySystem sys = build_many_body(spec, 1, Statistics::distinguishable, {});
  int seed = 500;
  for (int rep = 0; rep < 10; ++rep) {
    const OperatorMatrix h = random_hermitian(24, ++seed);
    const OperatorMatrix a = random_matrix(24, ++seed);
    ThermalState st = make_thermal_state_with_hamiltonian(sys, h, 1.0 + rep);
    const Complex p = mori_product(st, a, a);
    CHECK(std::abs(p.imag()) <= 1e-12 * std::max(1.0, std::abs(p)));
    CHECK(p.real() >= -1e-12 * std::max(1.0, std::abs(p)));
  }
}

TEST_CASE("equilibrium commutation identity holds across the trap") {
  ManyBodySystem sys = trapped_particle(40);
  ThermalState st = make_thermal_state(sys, 1.0);
  for (double r : {-1.0, -0.5, 0.0, 0.5, 1.5}) {
    CHECK(check_boltzmann_identity(st, r) <= 1e-10);
  }
}

TEST_CASE("equilibrium commutation identity holds for a free particle") {
  ManyBodySystem sys =
      build_many_body(grid_spec(16, 6.4), 1, Statistics::distinguishable, {});
  ThermalState st = make_thermal_state(sys, 0.8);
  for (double r : {sys.eval_points()[2], sys.eval_points()[9]}) {
    CHECK(check_boltzmann_identity(st, r) <= 1e-10);
  }
}
