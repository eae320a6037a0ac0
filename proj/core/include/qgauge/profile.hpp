#pragma once

#include <string>
#include <vector>

#include "qgauge/operator_matrix.hpp"

namespace qgauge {

// Scalar field sampled on an ordered point set, one complex value per
// point. Points are strictly increasing.
struct Profile {
  std::string label;
  std::vector<double> points;
  std::vector<Complex> values;

  std::size_t size() const { return points.size(); }
};

// Validates monotonicity and matching lengths.
Profile make_profile(std::string label, std::vector<double> points,
                     std::vector<Complex> values);

std::vector<double> real_values(const Profile& p);
double max_abs(const Profile& p);

// Max-abs difference of values; requires identical point sets.
double residual_norm(const Profile& a, const Profile& b);

}  // namespace qgauge
