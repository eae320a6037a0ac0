#pragma once

#include <functional>
#include <vector>

#include "qgauge/basis.hpp"
#include "qgauge/operator_matrix.hpp"

namespace qgauge {

enum class Statistics { distinguishable, boson, fermion };

using ScalarField = std::function<double(double)>;
using PairField = std::function<double(double, double)>;

ScalarField harmonic_potential(const Constants& c, double omega);
ScalarField tilted_potential(const Constants& c, double omega, double slope);
ScalarField tabulated_potential(std::vector<double> xs, std::vector<double> vs);
PairField gaussian_pair_potential(double u0, double width);

struct SystemOptions {
  ScalarField v_ext;  // null means zero external potential
  PairField u_pair;   // null means no interparticle term
};

// One fixed-particle-number system. Operators live on the projected
// space for identical particles; every stored operator is the
// projection of the corresponding tensor operator, and the builder is
// pure so instances are immutable and safe to share across threads.
class ManyBodySystem {
 public:
  const BasisSpec& basis() const { return spec_; }
  int particle_count() const { return particles_; }
  Statistics statistics() const { return stats_; }
  Index dim() const { return hamiltonian_.dim(); }

  const OperatorMatrix& hamiltonian() const { return hamiltonian_; }
  const OperatorMatrix& kinetic() const { return kinetic_; }
  const OperatorMatrix& interparticle() const { return interparticle_; }
  const OperatorMatrix& external() const { return external_; }
  const OperatorMatrix& sum_x() const { return sum_x_; }
  const OperatorMatrix& sum_p() const { return sum_p_; }
  const std::vector<OperatorMatrix>& particle_x() const { return particle_x_; }
  const std::vector<OperatorMatrix>& particle_p() const { return particle_p_; }

  const std::vector<double>& eval_points() const { return eval_points_; }
  double eval_weight() const { return eval_weight_; }
  std::size_t eval_index(double r) const;

  // Density operator rho(r) and mass current m J(r) at an evaluation
  // point; r off the evaluation set is rejected.
  const OperatorMatrix& density_operator(double r) const;
  const OperatorMatrix& current_operator(double r) const;

  // sum_i f(x_i), with f applied on the spectrum of the single
  // particle position operator.
  OperatorMatrix position_observable(const ScalarField& f) const;
  // sum_i (f(x_i) p_i + p_i f(x_i)).
  OperatorMatrix weighted_momentum(const ScalarField& f) const;
  // T + U + sum_i v(x_i); used to assemble driven Hamiltonians.
  OperatorMatrix hamiltonian_with_external(const ScalarField& v) const;

  // Columns spanning the projected space inside the full tensor space;
  // identity for a single particle or distinguishable pairs.
  const Matrix& isometry() const { return isometry_; }
  // max|V^dagger V - 1|, the exchange projector health check.
  double projector_gram_defect() const;

  friend ManyBodySystem build_many_body(const BasisSpec& spec, int particles,
                                        Statistics stats,
                                        const SystemOptions& opt);

 private:
  ManyBodySystem() = default;

  BasisSpec spec_;
  int particles_ = 0;
  Statistics stats_ = Statistics::distinguishable;
  SingleParticleOps sp_;
  Matrix isometry_;
  OperatorMatrix hamiltonian_, kinetic_, interparticle_, external_;
  OperatorMatrix sum_x_, sum_p_;
  std::vector<OperatorMatrix> particle_x_, particle_p_;
  std::vector<double> eval_points_;
  double eval_weight_ = 0.0;
  std::vector<OperatorMatrix> density_ops_, current_ops_;
};

// Supported particle counts are 0, 1 and 2. The N = 0 sector is the
// one-dimensional vacuum used by the grand ensemble.
ManyBodySystem build_many_body(const BasisSpec& spec, int particles,
                               Statistics stats, const SystemOptions& opt = {});

Matrix kronecker(const Matrix& a, const Matrix& b);

}  // namespace qgauge
