#include "qgauge/shift_field.hpp"

#include <cmath>
#include <stdexcept>

namespace qgauge {

ShiftField constant_field(double c) {
  return {"const", [c](double) { return c; }, [](double) { return 0.0; }};
}

ShiftField linear_field() {
  return {"linear", [](double x) { return x; }, [](double) { return 1.0; }};
}

ShiftField quadratic_field() {
  return {"quadratic", [](double x) { return x * x; },
          [](double x) { return 2.0 * x; }};
}

ShiftField sine_field(double k) {
  return {"sine",
          [k](double x) { return std::sin(k * x); },
          [k](double x) { return k * std::cos(k * x); }};
}

ShiftField cosine_field(double k) {
  return {"cosine",
          [k](double x) { return std::cos(k * x); },
          [k](double x) { return -k * std::sin(k * x); }};
}

ShiftField gaussian_field(double center, double width) {
  if (!(width > 0.0)) {
    throw std::invalid_argument("gaussian_field: width must be positive");
  }
  const double inv2 = 1.0 / (2.0 * width * width);
  return {"gaussian",
          [center, inv2](double x) {
            const double d = x - center;
            return std::exp(-d * d * inv2);
          },
          [center, inv2, width](double x) {
            const double d = x - center;
            return -d / (width * width) * std::exp(-d * d * inv2);
          }};
}

ShiftField lie_bracket_field(const ShiftField& e1, const ShiftField& e2,
                             double fd_step) {
  if (!(fd_step > 0.0)) {
    throw std::invalid_argument("lie_bracket_field: fd_step must be positive");
  }
  auto eval = [f1 = e1.eval, g1 = e1.grad, f2 = e2.eval, g2 = e2.grad](
                  double x) { return f1(x) * g2(x) - f2(x) * g1(x); };
  auto grad = [eval, fd_step](double x) {
    return (eval(x + fd_step) - eval(x - fd_step)) / (2.0 * fd_step);
  };
  return {e1.label + "*" + e2.label + "'-" + e2.label + "*" + e1.label + "'",
          eval, grad};
}

double gradient_defect(const ShiftField& f, const std::vector<double>& probes,
                       double fd_step) {
  if (!(fd_step > 0.0)) {
    throw std::invalid_argument("gradient_defect: fd_step must be positive");
  }
  double worst = 0.0;
  for (const double x : probes) {
    const double fd = (f.eval(x + fd_step) - f.eval(x - fd_step)) / (2.0 * fd_step);
    worst = std::max(worst, std::abs(fd - f.grad(x)));
  }
  return worst;
}

}  // namespace qgauge
