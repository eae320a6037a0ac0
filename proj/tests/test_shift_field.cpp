#include <cmath>
#include <vector>

#include "doctest.h"
#include "qgauge/shift_field.hpp"

using namespace qgauge;

namespace {
const std::vector<double> probes{-2.1, -0.9, -0.3, 0.0, 0.4, 1.1, 2.7};
}

TEST_CASE("stored gradients match finite differences for the stock fields") {
  for (const ShiftField& f :
       {constant_field(2.5), linear_field(), quadratic_field(), sine_field(1.3),
        cosine_field(0.8), gaussian_field(0.4, 1.1)}) {
    CHECK(gradient_defect(f, probes) <= 1e-8);
  }
}

TEST_CASE("field bracket of linear and quadratic profiles") {
  // x and x^2 have bracket x * 2x - x^2 * 1 = x^2.
  ShiftField b = lie_bracket_field(linear_field(), quadratic_field());
  for (double x : probes)
    CHECK(b.eval(x) == doctest::Approx(x * x).epsilon(1e-12));
  CHECK(gradient_defect(b, probes) <= 1e-6);
}

TEST_CASE("field bracket of sine and cosine profiles") {
  // sin(x) and cos(x) have bracket -sin^2 - cos^2 = -1.
  ShiftField b = lie_bracket_field(sine_field(1.0), cosine_field(1.0));
  for (double x : probes)
    CHECK(b.eval(x) == doctest::Approx(-1.0).epsilon(1e-12));
}

TEST_CASE("field bracket vanishes on equal arguments") {
  ShiftField g = gaussian_field(-0.2, 0.9);
  ShiftField b = lie_bracket_field(g, g);
  for (double x : probes) CHECK(std::abs(b.eval(x)) <= 1e-14);
}

TEST_CASE("two constant fields commute") {
  ShiftField b = lie_bracket_field(constant_field(3.0), constant_field(-1.2));
  for (double x : probes) CHECK(std::abs(b.eval(x)) <= 1e-14);
}

TEST_CASE("a constant field advects the gradient of the other") {
  const double c = 3.0;
  ShiftField g = gaussian_field(0.5, 1.0);
  ShiftField b = lie_bracket_field(constant_field(c), g);
  for (double x : probes)
    CHECK(b.eval(x) == doctest::Approx(c * g.grad(x)).epsilon(1e-12));
}

TEST_CASE("gradient defect flags an inconsistent field") {
  ShiftField broken;
  broken.label = "broken";
  broken.eval = [](double x) { return x * x; };
  broken.grad = [](double) { return 0.0; };
  CHECK(gradient_defect(broken, probes) > 0.1);
}
