#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "splitimm/quadrature.hpp"
#include "splitimm/scale.hpp"

using namespace splitimm;

namespace {

ScaleGrid closed_form_exp_grid(double horizon, double h) {
  // W(t) = 2e^t - 1 for b=2, d=1: exact grid, no solver error
  ScaleGrid grid;
  grid.h = h;
  grid.b = 2.0;
  grid.eta = 1.0;
  auto n = static_cast<std::size_t>(std::llround(horizon / h));
  grid.values.resize(n + 1);
  grid.derivs.resize(n + 1);
  for (std::size_t k = 0; k <= n; ++k) {
    double t = h * static_cast<double>(k);
    grid.values[k] = 2.0 * std::exp(t) - 1.0;
    grid.derivs[k] = 2.0 * std::exp(t);
  }
  return grid;
}

}  // namespace

TEST_CASE("solver reproduces closed-form scale functions") {
  struct Case {
    LifespanModel model;
    double (*exact)(double);
    double valid_to;
  };
  std::vector<Case> cases = {
      {LifespanModel(2.0, Exponential{1.0}), [](double t) { return 2.0 * std::exp(t) - 1.0; },
       3.0},
      {LifespanModel(1.0, DiracInfinite{}), [](double t) { return std::exp(t); }, 3.0},
      {LifespanModel(2.0, DiracFinite{1.0}), [](double t) { return std::exp(2.0 * t); }, 1.0},
  };
  for (const auto& c : cases) {
    DerivedParams params = malthusian(c.model);
    ScaleGrid grid = solve_scale(c.model, params, 3.0, 1e-3);
    CHECK(grid.values.front() == 1.0);
    for (std::size_t k = 0; k < grid.values.size(); ++k) {
      double t = grid.h * static_cast<double>(k);
      if (t >= c.valid_to) break;
      CHECK(grid.values[k] == doctest::Approx(c.exact(t)).epsilon(1e-4));
    }
  }
}

TEST_CASE("solver self-convergence under step refinement") {
  // a density jump (Uniform at hi) degrades the convolution quadrature to
  // first order; successive halvings must still shrink the error geometrically
  LifespanModel model(3.0, Uniform{0.0, 1.0});
  DerivedParams params = malthusian(model);
  double w1 = w_at(solve_scale(model, params, 5.0, 1e-3), 5.0).first;
  double w2 = w_at(solve_scale(model, params, 5.0, 5e-4), 5.0).first;
  double w3 = w_at(solve_scale(model, params, 5.0, 2.5e-4), 5.0).first;
  double ratio = std::abs(w1 - w2) / std::abs(w2 - w3);
  CHECK(ratio > 1.7);
  CHECK(ratio < 4.5);

  // smooth density: halving the step changes W(5) only at the 1e-5 level
  LifespanModel smooth(1.5, GammaDist{2.0, 1.0});
  DerivedParams sp = malthusian(smooth);
  double g1 = w_at(solve_scale(smooth, sp, 5.0, 1e-3), 5.0).first;
  double g2 = w_at(solve_scale(smooth, sp, 5.0, 5e-4), 5.0).first;
  CHECK(std::abs(g1 / g2 - 1.0) < 1e-4);
}

TEST_CASE("W is increasing and e^{-eta t} W(t) converges to 1/c") {
  LifespanModel model(1.5, GammaDist{2.0, 1.0});
  DerivedParams params = malthusian(model);
  ScaleGrid grid = solve_scale(model, params, 12.0 / params.eta + 0.01, 1e-3);
  for (std::size_t k = 1; k < grid.values.size(); ++k) {
    REQUIRE(grid.values[k] > grid.values[k - 1]);
  }
  double t = 12.0 / params.eta;
  CHECK(params.c * std::exp(-params.eta * t) * w_at(grid, t).first ==
        doctest::Approx(1.0).epsilon(2e-3));
}

TEST_CASE("x_t_pmf is the claimed geometric-type law") {
  ScaleGrid grid = closed_form_exp_grid(2.0, 1e-4);
  double t = 1.0;
  double w = 2.0 * std::exp(1.0) - 1.0;
  double wp = 2.0 * std::exp(1.0);
  CHECK(x_t_pmf(grid, t, 0) == doctest::Approx(1.0 - wp / (2.0 * w)).epsilon(1e-9));
  double total = 0.0;
  for (std::int64_t n = 0; n <= 2000; ++n) total += x_t_pmf(grid, t, n);
  CHECK(total == doctest::Approx(1.0).epsilon(1e-9));
  // survival probability P(X(t) > 0) = W'/(bW)
  CHECK(1.0 - x_t_pmf(grid, t, 0) == doctest::Approx(wp / (2.0 * w)).epsilon(1e-9));
}

TEST_CASE("conditional law mixed over the ancestor lifespan recovers x_t_pmf") {
  ScaleGrid grid = closed_form_exp_grid(3.0, 1e-4);
  double t = 1.0;
  for (std::int64_t n : {0, 1, 2, 5}) {
    // ancestor lifespan ~ Exp(1); lifespans longer than t behave like x = t
    // loose tolerance: the grid-interpolated integrand is only piecewise linear
    double mixed = integrate([&](double x) {
      return std::exp(-x) * x_t_pmf_given_ancestor(grid, x, t, n);
    }, 1e-12, t, 1e-9);
    mixed += std::exp(-t) * x_t_pmf_given_ancestor(grid, t + 1.0, t, n);
    CHECK(mixed == doctest::Approx(x_t_pmf(grid, t, n)).epsilon(1e-6));
  }
}

TEST_CASE("conditional pmf is a probability law for each ancestor lifespan") {
  ScaleGrid grid = closed_form_exp_grid(3.0, 1e-4);
  for (double x : {0.2, 0.7, 1.5}) {
    double total = 0.0;
    for (std::int64_t n = 0; n <= 4000; ++n) total += x_t_pmf_given_ancestor(grid, x, 1.0, n);
    CHECK(total == doctest::Approx(1.0).epsilon(1e-8));
  }
}

TEST_CASE("convention: W vanishes on negatives") {
  ScaleGrid grid = closed_form_exp_grid(1.0, 1e-3);
  CHECK(w_signed(grid, -0.5) == 0.0);
  CHECK(w_signed(grid, 0.0) == 1.0);
}

TEST_CASE("input validation") {
  LifespanModel model(2.0, Exponential{1.0});
  DerivedParams params = malthusian(model);
  CHECK_THROWS_AS(solve_scale(model, params, 1.0, 0.0), InputError);
  CHECK_THROWS_AS(solve_scale(model, params, 0.0, 1.0), InputError);
  ScaleGrid grid = solve_scale(model, params, 1.0, 1e-3);
  CHECK_THROWS_AS(w_at(grid, -0.1), InputError);
  CHECK_THROWS_AS(w_at(grid, 1.5), InputError);
  CHECK_THROWS_AS(x_t_pmf_given_ancestor(grid, 0.0, 0.5, 1), InputError);
}
