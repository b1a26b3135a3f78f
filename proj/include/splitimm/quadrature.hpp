#pragma once

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <limits>

#include "splitimm/errors.hpp"

namespace splitimm {

// Adaptive Gauss-Kronrod on a finite interval, absolute tolerance `tol`.
// Non-convergence is an error, never a silent fallback.
template <class F>
double integrate(F&& f, double a, double b, double tol = 1e-12) {
  if (!(a < b)) return 0.0;
  double error = 0.0;
  double value = boost::math::quadrature::gauss_kronrod<double, 15>::integrate(
      f, a, b, 15, tol, &error);
  double scale = std::max(1.0, std::abs(value));
  if (!(error <= 100.0 * tol * scale) || !std::isfinite(value)) {
    throw NumericalError("quadrature did not converge on [" + std::to_string(a) + "," +
                         std::to_string(b) + "]: error estimate " + std::to_string(error));
  }
  return value;
}

// Integral over (a, infinity) of a decaying integrand.
template <class F>
double integrate_to_inf(F&& f, double a, double tol = 1e-10) {
  boost::math::quadrature::exp_sinh<double> integrator;
  double error = 0.0;
  double l1 = 0.0;
  auto shifted = [&f, a](double u) { return f(a + u); };
  double value = integrator.integrate(shifted, tol, &error, &l1);
  if (!std::isfinite(value) || !(error <= 1e-6 * std::max(1.0, l1))) {
    throw NumericalError("semi-infinite quadrature did not converge, error estimate " +
                         std::to_string(error));
  }
  return value;
}

}  // namespace splitimm
