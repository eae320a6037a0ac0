#pragma once

#include <string>
#include <vector>

#include "qgauge/system.hpp"

namespace qgauge {

// Smooth scalar field on position together with its derivative, the
// parameterisation of the integrated shift generator.
struct ShiftField {
  std::string label;
  ScalarField eval;
  ScalarField grad;
};

ShiftField constant_field(double c);
ShiftField linear_field();
ShiftField quadratic_field();
ShiftField sine_field(double k);
ShiftField cosine_field(double k);
ShiftField gaussian_field(double center, double width);

// eps_delta = eps1 grad(eps2) - eps2 grad(eps1). Its own gradient is
// formed by central differences of the closed form with step fd_step.
ShiftField lie_bracket_field(const ShiftField& e1, const ShiftField& e2,
                             double fd_step = 1e-5);

// Max mismatch between grad and a central-difference of eval over the
// probe points; consistency gate used at construction sites.
double gradient_defect(const ShiftField& f, const std::vector<double>& probes,
                       double fd_step = 1e-5);

}  // namespace qgauge
