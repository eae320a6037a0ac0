#include <cmath>
#include <stdexcept>

#include "doctest.h"
#include "qgauge/gauge.hpp"
#include "qgauge/random.hpp"
#include "qgauge/shift_field.hpp"
#include "qgauge/spectral.hpp"
#include "qgauge/system.hpp"

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

}  // namespace

TEST_CASE("shift of the identity observable vanishes") {
  ManyBodySystem sys = trapped_particle(30);
  for (double r : {-1.2, 0.0, 0.8}) {
    const double scale = std::max(1.0, max_abs(sys.current_operator(r)));
    CHECK(max_abs(sigma_apply(sys, r, identity_operator(sys.dim()))) <=
          1e-14 * scale);
  }
}

TEST_CASE("shifting the energy gives minus the force density") {
  BasisSpec spec = grid_spec(16, 6.4);
  SystemOptions opt;
  opt.v_ext = harmonic_potential(spec.constants, 1.0);
  opt.u_pair = gaussian_pair_potential(0.6, 0.8);
  ManyBodySystem sys = build_many_body(spec, 2, Statistics::boson, opt);
  const double r = sys.eval_points()[5];
  const OperatorMatrix lhs = sigma_apply(sys, r, sys.hamiltonian());
  const ForceDensityParts f = force_density(sys, r);
  const double scale = std::max(1.0, max_abs(f.total));
  CHECK(max_abs(lhs + f.total) <= 1e-13 * scale);
  CHECK(max_abs(f.total - f.kinetic - f.interparticle - f.external) <=
        1e-14 * scale);
  CHECK(hermiticity_defect(f.total) <= 1e-12 * scale);
}

TEST_CASE("free particle force density is purely kinetic") {
  ManyBodySystem sys =
      build_many_body(grid_spec(16, 6.4), 1, Statistics::distinguishable, {});
  const double r = sys.eval_points()[3];
  const ForceDensityParts f = force_density(sys, r);
  const double scale = std::max(1.0, max_abs(f.total));
  CHECK(max_abs(f.total - f.kinetic) <= 1e-15 * scale);
  CHECK(max_abs(f.external) <= 1e-15 * scale);
  CHECK(max_abs(f.interparticle) <= 1e-15 * scale);
}

TEST_CASE("shift preserves Hermiticity and commutes with the adjoint") {
  ManyBodySystem sys = trapped_particle(24);
  const double r = 0.6;
  const OperatorMatrix a = random_hermitian(sys.dim(), 7);
  CHECK(hermiticity_defect(sigma_apply(sys, r, a)) <=
        1e-12 * max_abs(sigma_apply(sys, r, a)));

  const OperatorMatrix g = random_matrix(sys.dim(), 8);
  const OperatorMatrix lhs = adjoint(sigma_apply(sys, r, g));
  const OperatorMatrix rhs = sigma_apply(sys, r, adjoint(g));
  CHECK(residual_norm(lhs, rhs) <= 1e-13 * std::max(1.0, max_abs(lhs)));
}

TEST_CASE("constant shift field acts as the identity on position") {
  ManyBodySystem sys = trapped_particle(40);
  LowSubspace q = low_subspace(sys, 20);
  const double c = 1.7;
  const OperatorMatrix lhs =
      sigma_integrated_apply(sys, constant_field(c), sys.sum_x());
  const OperatorMatrix rhs = c * identity_operator(sys.dim());
  CHECK(projected_residual(q, lhs, rhs) <= 1e-10);
}

TEST_CASE("linear shift field rescales the momentum") {
  ManyBodySystem sys = trapped_particle(40);
  LowSubspace q = low_subspace(sys, 20);
  const OperatorMatrix lhs =
      sigma_integrated_apply(sys, linear_field(), sys.sum_p());
  const OperatorMatrix rhs = Complex(-1.0) * sys.sum_p();
  CHECK(projected_residual(q, lhs, rhs) <= 1e-10);
}

TEST_CASE("integrated shift equals the weighted sum of local shifts on a grid") {
  ManyBodySystem sys =
      build_many_body(grid_spec(20, 8.0), 1, Statistics::distinguishable, {});
  const ShiftField eps = gaussian_field(0.4, 1.1);
  const OperatorMatrix a = random_hermitian(sys.dim(), 13);
  const OperatorMatrix lhs = sigma_integrated_apply(sys, eps, a);
  OperatorMatrix rhs = zero_operator(sys.dim());
  for (double r : sys.eval_points()) {
    rhs = rhs + (sys.eval_weight() * eps.eval(r)) * sigma_apply(sys, r, a);
  }
  CHECK(residual_norm(lhs, rhs) <= 1e-12 * std::max(1.0, max_abs(lhs)));
}

TEST_CASE("trace pairing with a shifted operator is antisymmetric") {
  BasisSpec spec = grid_spec(12, 5.0);
  SystemOptions opt;
  opt.u_pair = gaussian_pair_potential(0.5, 0.6);
  ManyBodySystem sys = build_many_body(spec, 2, Statistics::fermion, opt);
  const double r = sys.eval_points()[4];
  const OperatorMatrix a = random_hermitian(sys.dim(), 21);
  const OperatorMatrix b = random_hermitian(sys.dim(), 22);
  CHECK(anti_self_adjoint_defect(sys, r, a, b) <= 1e-12);
  CHECK(anti_self_adjoint_defect(sys, r, identity_operator(sys.dim()),
                                 identity_operator(sys.dim())) <= 1e-14);
}

TEST_CASE("shift commutator check is exact at coincident points") {
  ManyBodySystem sys =
      build_many_body(grid_spec(24, 8.0), 1, Statistics::distinguishable, {});
  LowSubspace q = low_subspace(sys, 6);
  const double r = sys.eval_points()[10];
  const OperatorMatrix a = random_hermitian(sys.dim(), 31);
  CHECK(check_sigma_commutator(sys, q, r, r, a) <= 1e-14);
}

TEST_CASE("shift commutator check rejects non-grid bases") {
  ManyBodySystem sys = trapped_particle(12);
  LowSubspace q = low_subspace(sys, 4);
  CHECK_THROWS_AS(check_sigma_commutator(sys, q, 0.0, 0.1,
                                         identity_operator(sys.dim())),
                  std::invalid_argument);
}

TEST_CASE("field algebra closes trivially on equal fields") {
  ManyBodySystem sys = trapped_particle(32);
  LowSubspace q = low_subspace(sys, 8);
  const ShiftField e = gaussian_field(0.2, 0.9);
  const OperatorMatrix a = random_hermitian(sys.dim(), 41);
  CHECK(check_lie_algebra(sys, q, e, e, a) <= 1e-13);
}

TEST_CASE("field algebra residual collapses under truncation doubling") {
  const ShiftField e1 = linear_field();
  const ShiftField e2 = quadratic_field();
  auto residual = [&](int n_max) {
    ManyBodySystem sys = trapped_particle(n_max);
    LowSubspace q = low_subspace(sys, 12);
    const OperatorMatrix a =
        sys.position_observable([](double x) {
          return std::exp(-0.5 * (x - 0.4) * (x - 0.4));
        });
    return check_lie_algebra(sys, q, e1, e2, a);
  };
  const double r64 = residual(64);
  const double r128 = residual(128);
  CHECK(r128 <= 0.5 * r64 + 1e-12);
}

TEST_CASE("canonical shift responses on a fine oscillator basis") {
  ManyBodySystem sys = trapped_particle(80);
  LowSubspace q = low_subspace(sys, 20);
  CanonicalShiftResiduals res =
      check_canonical_shift(sys, q, gaussian_field(0.3, 0.7));
  CHECK(res.position <= 1e-10);
  CHECK(res.momentum <= 1e-10);
}

TEST_CASE("density recovered from the shift of total position") {
  ManyBodySystem sys = trapped_particle(80);
  LowSubspace q = low_subspace(sys, 20);
  for (double r : {-0.5, 0.0, 0.3}) {
    CHECK(check_density_from_shift(sys, q, r) <= 1e-10);
  }
}

TEST_CASE("external force gradient check is grid only") {
  ManyBodySystem sys = trapped_particle(16);
  LowSubspace q = low_subspace(sys, 4);
  CHECK_THROWS_AS(
      check_external_force_gradient(sys, q, [](double) { return 0.0; }, 0.0),
      std::invalid_argument);
}
