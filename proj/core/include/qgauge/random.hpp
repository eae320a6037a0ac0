#pragma once

#include <cstdint>
#include <random>

#include "qgauge/operator_matrix.hpp"

namespace qgauge {

// Deterministic normal deviates. Box-Muller on top of mt19937_64 so the
// stream does not depend on the standard library's distribution
// implementation; identical seeds give identical matrices on a platform.
class GaussianSource {
 public:
  explicit GaussianSource(std::uint64_t seed) : rng_(seed) {}

  double normal();
  Complex complex_normal();

 private:
  std::mt19937_64 rng_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

// (G + G^dagger)/2 with iid complex normal entries, scaled by `scale`.
OperatorMatrix random_hermitian(Index dim, std::uint64_t seed,
                                double scale = 1.0);

// Unconstrained complex Gaussian matrix.
OperatorMatrix random_matrix(Index dim, std::uint64_t seed, double scale = 1.0);

// Haar-like random unitary via QR of a Gaussian matrix.
Matrix random_unitary(Index dim, std::uint64_t seed);

}  // namespace qgauge
