#pragma once

#include <variant>
#include <vector>

#include "qgauge/operator_matrix.hpp"

namespace qgauge {

struct Constants {
  double hbar = 1.0;
  double mass = 1.0;
};

enum class Boundary { periodic, hard_wall };
enum class MomentumScheme { spectral, central_difference };

// Uniform grid of `sites` points on a box of the given length centred
// at the origin; spacing h = length / sites. Periodic coordinates start
// at -L/2, hard-wall coordinates sit at cell centres.
struct GridSpec {
  int sites = 32;
  double length = 12.0;
  Boundary boundary = Boundary::periodic;
  MomentumScheme scheme = MomentumScheme::spectral;
};

// Number-state truncation |0..n_max> of a harmonic trap of frequency
// omega. Evaluation points are a uniform grid over
// |x| <= eval_span * sqrt(hbar/(m omega)).
struct OscillatorSpec {
  int n_max = 80;
  double omega = 1.0;
  double eval_span = 8.0;
  int eval_count = 161;
};

struct BasisSpec {
  Constants constants;
  std::variant<GridSpec, OscillatorSpec> kind = OscillatorSpec{};

  bool is_grid() const { return std::holds_alternative<GridSpec>(kind); }
  const GridSpec& grid() const { return std::get<GridSpec>(kind); }
  const OscillatorSpec& oscillator() const {
    return std::get<OscillatorSpec>(kind);
  }

  Index single_particle_dim() const;

  // Throws std::invalid_argument on out-of-range parameters. Hard-wall
  // boxes only support the central-difference momentum scheme.
  void validate() const;
};

// Position and momentum matrices plus the spectral data of x used to
// apply scalar functions of position.
struct SingleParticleOps {
  Matrix x;
  Matrix p;
  RealVector x_nodes;   // eigenvalues of x, ascending
  Matrix x_vectors;     // corresponding eigenvector columns
  std::vector<double> eval_points;
  double eval_weight;   // Riemann weight of one evaluation point
};

SingleParticleOps build_single_particle(const BasisSpec& spec);

// Orthonormal Hermite functions h_n(xi), unit length scale, up to
// n_max, by the stable two-term recurrence.
std::vector<double> hermite_functions(int n_max, double xi);

// Matrix of the density at r, i.e. the finite representation of
// delta(r - x): site projector / h on the grid, phi_m(r) phi_n(r) in
// the oscillator basis. r must lie on the evaluation set for grids.
Matrix single_particle_density(const BasisSpec& spec, double r);

}  // namespace qgauge
