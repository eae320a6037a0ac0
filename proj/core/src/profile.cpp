#include "qgauge/profile.hpp"

#include <cmath>
#include <stdexcept>

namespace qgauge {

Profile make_profile(std::string label, std::vector<double> points,
                     std::vector<Complex> values) {
  if (points.size() != values.size())
    throw std::invalid_argument("make_profile: " + label + ": " +
                                std::to_string(points.size()) + " points vs " +
                                std::to_string(values.size()) + " values");
  for (std::size_t i = 1; i < points.size(); ++i)
    if (!(points[i] > points[i - 1]))
      throw std::invalid_argument("make_profile: " + label +
                                  ": points not strictly increasing at index " +
                                  std::to_string(i));
  Profile p;
  p.label = std::move(label);
  p.points = std::move(points);
  p.values = std::move(values);
  return p;
}

std::vector<double> real_values(const Profile& p) {
  std::vector<double> out(p.values.size());
  for (std::size_t i = 0; i < p.values.size(); ++i) out[i] = p.values[i].real();
  return out;
}

double max_abs(const Profile& p) {
  double m = 0.0;
  for (const Complex& v : p.values) m = std::max(m, std::abs(v));
  return m;
}

double residual_norm(const Profile& a, const Profile& b) {
  if (a.points.size() != b.points.size())
    throw std::invalid_argument("residual_norm: profile length mismatch");
  for (std::size_t i = 0; i < a.points.size(); ++i)
    if (a.points[i] != b.points[i])
      throw std::invalid_argument("residual_norm: profile point sets differ");
  double m = 0.0;
  for (std::size_t i = 0; i < a.values.size(); ++i)
    m = std::max(m, std::abs(a.values[i] - b.values[i]));
  return m;
}

}  // namespace qgauge
