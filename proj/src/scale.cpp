#include "splitimm/scale.hpp"

#include <algorithm>
#include <cmath>

#include "splitimm/errors.hpp"

namespace splitimm {

namespace {

// Interpolated W(u) restricted to the already-computed prefix [0, k*h].
double w_prefix(const std::vector<double>& w, double h, double u, std::size_t known) {
  if (u < 0.0) return 0.0;
  double pos = u / h;
  auto j = static_cast<std::size_t>(pos);
  if (j >= known) return w[known];
  double frac = pos - static_cast<double>(j);
  return w[j] + frac * (w[j + 1] - w[j]);
}

}  // namespace

double default_scale_step(const DerivedParams& params) {
  return 1e-3 * std::min(1.0, 1.0 / params.eta);
}

ScaleGrid solve_scale(const LifespanModel& model, const DerivedParams& params, double horizon,
                      double h) {
  if (!(h > 0.0) || !(horizon >= h)) throw InputError("solve_scale requires h > 0, horizon >= h");
  const double b = model.birth_rate();
  const auto n = static_cast<std::size_t>(std::llround(horizon / h));

  ScaleGrid grid;
  grid.h = h;
  grid.b = b;
  grid.eta = params.eta;
  auto& w = grid.values;
  auto& wp = grid.derivs;
  w.assign(n + 1, 0.0);
  wp.assign(n + 1, 0.0);
  w[0] = 1.0;
  wp[0] = b;  // conv vanishes at 0+

  // Lambda density on the grid; the finite atom (if any) is handled exactly.
  std::vector<double> g(n + 2);
  for (std::size_t j = 0; j < g.size(); ++j) g[j] = model.lambda_density(j * h);
  const auto atom = model.lambda_atom();

  for (std::size_t k = 0; k < n; ++k) {
    // Historical part of the trapezoidal convolution at t_{k+1}; the j = 0
    // term carries the yet-unknown W(t_{k+1}) and is added per stage.
    double s = 0.0;
    for (std::size_t j = 1; j <= k; ++j) s += w[k + 1 - j] * g[j];
    s = h * (s + 0.5 * w[0] * g[k + 1]);
    if (atom) {
      double u = (k + 1) * h - atom->first;
      if (u >= 0.0) s += atom->second * w_prefix(w, h, u, k);
    }
    double conv_unknown = 0.5 * h * g[0];

    double f_k = wp[k];
    double predict = w[k] + h * f_k;
    double f_pred = b * predict - (s + conv_unknown * predict);
    w[k + 1] = w[k] + 0.5 * h * (f_k + f_pred);
    wp[k + 1] = b * w[k + 1] - (s + conv_unknown * w[k + 1]);
    if (!(w[k + 1] > w[k])) {
      throw SolverError("scale solver produced non-increasing W at t = " +
                        std::to_string((k + 1) * h) + "; try a smaller step");
    }
  }
  return grid;
}

std::pair<double, double> w_at(const ScaleGrid& grid, double t) {
  if (t < 0.0 || t > grid.horizon() + 1e-12 * grid.h) {
    throw InputError("w_at: t outside [0, horizon]");
  }
  double pos = t / grid.h;
  auto j = static_cast<std::size_t>(pos);
  if (j >= grid.values.size() - 1) return {grid.values.back(), grid.derivs.back()};
  double frac = pos - static_cast<double>(j);
  return {grid.values[j] + frac * (grid.values[j + 1] - grid.values[j]),
          grid.derivs[j] + frac * (grid.derivs[j + 1] - grid.derivs[j])};
}

double w_signed(const ScaleGrid& grid, double u) {
  if (u < 0.0) return 0.0;
  return w_at(grid, u).first;
}

double x_t_pmf(const ScaleGrid& grid, double t, std::int64_t n) {
  auto [w, wp] = w_at(grid, t);
  if (n == 0) return 1.0 - wp / (grid.b * w);
  return std::pow(1.0 - 1.0 / w, static_cast<double>(n - 1)) * wp / (grid.b * w * w);
}

double x_t_pmf_given_ancestor(const ScaleGrid& grid, double x, double t, std::int64_t n) {
  if (!(x > 0.0)) throw InputError("ancestor lifespan must be positive");
  double wt = w_at(grid, t).first;
  double wtx = w_signed(grid, t - x);
  if (n == 0) return wtx / wt;
  return (1.0 - wtx / wt) * std::pow(1.0 - 1.0 / wt, static_cast<double>(n - 1)) / wt;
}

}  // namespace splitimm
