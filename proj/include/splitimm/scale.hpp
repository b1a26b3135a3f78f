#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "splitimm/model.hpp"

namespace splitimm {

/// Scale function W and its derivative on a uniform grid, from solving
/// W' = bW - W * Lambda (convolution) forward from W(0) = 1.
struct ScaleGrid {
  double h = 0.0;
  std::vector<double> values;  // W(kh)
  std::vector<double> derivs;  // W'(kh)
  double b = 0.0;              // birth rate of the generating model
  double eta = 0.0;

  double horizon() const { return h * (values.size() - 1); }
};

/// Default grid step: 1e-3 * min(1, 1/eta).
double default_scale_step(const DerivedParams& params);

/// Integrates the renewal identity with trapezoidal product integration for
/// the convolution (a Dirac atom is convolved exactly, no smearing) and Heun
/// predictor-corrector stepping. Throws SolverError if W stops increasing.
ScaleGrid solve_scale(const LifespanModel& model, const DerivedParams& params, double horizon,
                      double h);

/// Linear interpolation on the grid; exact at grid points.
std::pair<double, double> w_at(const ScaleGrid& grid, double t);

// W extended by 0 on negatives (convention used by the conditioned law).
double w_signed(const ScaleGrid& grid, double u);

/// P(X(t) = n): 1 - W'/(bW) at n = 0, geometric body (1-1/W)^{n-1} W'/(bW^2).
double x_t_pmf(const ScaleGrid& grid, double t, std::int64_t n);

/// Law of X(t) conditioned on the ancestor living exactly x units of time.
double x_t_pmf_given_ancestor(const ScaleGrid& grid, double x, double t, std::int64_t n);

}  // namespace splitimm
