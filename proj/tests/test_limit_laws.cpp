#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "splitimm/estimate.hpp"
#include "splitimm/limit_laws.hpp"
#include "splitimm/quadrature.hpp"

using namespace splitimm;

TEST_CASE("GEM sticks: structure and first-stick mean 1/(1+alpha)") {
  RngStream stream(61);
  const int n = 5000;
  for (double alpha : {1.0, 2.0}) {
    double first_sum = 0.0;
    for (int i = 0; i < n; ++i) {
      LimitSample sample = gem_sample(alpha, 8, stream);
      REQUIRE(sample.points.size() == 8);
      CHECK(sample.total == 1.0);
      double sum = 0.0;
      for (double p : sample.points) {
        CHECK(p > 0.0);
        sum += p;
      }
      CHECK(sum < 1.0);
      first_sum += sample.points.front();
    }
    double target = 1.0 / (1.0 + alpha);
    CHECK(std::abs(first_sum / n - target) < 4.0 * 0.3 / std::sqrt(static_cast<double>(n)));
  }
  CHECK_THROWS_AS(gem_sample(0.0, 3, stream), InputError);
}

TEST_CASE("Model II limit sticks have Dirichlet means p_i") {
  RngStream stream(67);
  const int n = 5000;
  std::vector<double> p = {0.3, 0.7};
  double sum1 = 0.0, sum2 = 0.0;
  for (int i = 0; i < n; ++i) {
    auto sticks = model2_limit_sample(2.0, p, 2, stream);
    REQUIRE(sticks.size() == 2);
    CHECK(sticks[0] + sticks[1] == doctest::Approx(1.0).epsilon(1e-12));
    sum1 += sticks[0];
    sum2 += sticks[1];
  }
  CHECK(std::abs(sum1 / n - 0.3) < 4.0 * 0.3 / std::sqrt(static_cast<double>(n)));
  CHECK(std::abs(sum2 / n - 0.7) < 4.0 * 0.3 / std::sqrt(static_cast<double>(n)));
  CHECK_THROWS_AS(model2_limit_sample(1.0, p, 3, stream), InputError);
}

TEST_CASE("GEM MLE recovers alpha from 1000 sticks") {
  RngStream stream(71);
  LimitSample sample = gem_sample(2.0, 1000, stream);
  AlphaEstimate estimate = estimate_alpha(sample.points);
  // 1000 GEM(2) sticks leave a remainder ~e^{-500}, so the sum rounds to 1
  // and the (degenerate) last stick is dropped
  CHECK(estimate.k_used >= 999);
  CHECK(estimate.alpha_hat > 1.9);
  CHECK(estimate.alpha_hat < 2.1);
  CHECK(estimate.ci_low < estimate.alpha_hat);
  CHECK(estimate.ci_high > estimate.alpha_hat);
}

TEST_CASE("estimate_alpha closed-form single-stick cases") {
  CHECK(estimate_alpha({1.0 - std::exp(-1.0)}).alpha_hat == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(estimate_alpha({0.5}).alpha_hat == doctest::Approx(1.0 / std::log(2.0)).epsilon(1e-12));
  CHECK_THROWS_AS(estimate_alpha({}), InputError);
  CHECK_THROWS_AS(estimate_alpha({-0.1}), InputError);
  CHECK_THROWS_AS(estimate_alpha({0.6, 0.6}), InputError);
  CHECK_THROWS_AS(estimate_alpha({1.0}), InputError);  // exhaustive single stick
  // fractions summing to 1: last stick dropped
  CHECK(estimate_alpha({0.5, 0.5}).k_used == 1);
}

TEST_CASE("sup-Poisson exceedance probability") {
  CHECK(sup_poisson_tail(1.0, 2.0) == doctest::Approx(0.5));
  CHECK(sup_poisson_tail(2.0, 1.0) == doctest::Approx(1.0));
  CHECK(sup_poisson_tail(1.0, 0.5) == doctest::Approx(1.0));
  CHECK_THROWS_AS(sup_poisson_tail(0.0, 1.0), InputError);
}

TEST_CASE("image PPP intensity is (rho/r) F(v)/v") {
  auto intensity = ppp_scaled_intensity(2.0, 0.5, [](double v) { return std::exp(-v); });
  CHECK(intensity(1.0) == doctest::Approx(4.0 * std::exp(-1.0)).epsilon(1e-12));
  CHECK(intensity(2.0) == doctest::Approx(2.0 * std::exp(-2.0)).epsilon(1e-12));
}

TEST_CASE("Model III tail F: boundary value, monotonicity, range") {
  ModelIII spec{FisherLogSeries{1.0}};
  double theta = 1.0, b = 2.0, c = 0.5;
  CHECK(model3_tail_F(spec, theta, b, c, 0.0) == 1.0);
  double prev = 1.0;
  for (double v : {0.01, 0.1, 0.5, 1.0, 3.0, 10.0}) {
    double f = model3_tail_F(spec, theta, b, c, v);
    CHECK(f >= 0.0);
    CHECK(f <= prev + 1e-9);
    prev = f;
  }
  CHECK(prev < 0.05);
}

TEST_CASE("generic abundance reproduces the Fisher specialization") {
  // e^{-x}/x truncated to (0, 40); theta = int x f(x) dx = 1 - e^{-40}
  ModelIII generic{GenericAbundance{[](double x) { return std::exp(-x) / x; }, 40.0}};
  ModelIII fisher{FisherLogSeries{1.0}};
  double theta_g = -std::expm1(-40.0);
  for (double v : {0.2, 1.0, 3.0}) {
    CHECK(model3_tail_F(generic, theta_g, 2.0, 0.5, v) ==
          doctest::Approx(model3_tail_F(fisher, 1.0, 2.0, 0.5, v)).epsilon(1e-4));
  }
}

TEST_CASE("sigma: Laplace transform and mean are consistent") {
  ModelIII spec{FisherLogSeries{1.0}};
  double theta = 1.0, b = 2.0, eta = 1.0, c = 0.5;
  CHECK(sigma_laplace(spec, theta, b, eta, c, 0.0) == 1.0);
  double prev = 1.0;
  for (double s : {0.25, 0.5, 1.0, 2.0}) {
    double l = sigma_laplace(spec, theta, b, eta, c, s);
    CHECK(l > 0.0);
    CHECK(l < prev);
    prev = l;
  }
  // E[sigma] for a=1: (1/(eta b c)) int x^2 e^{-x}/x dx = 1/(1*2*0.5) = 1
  double mean = sigma_mean(spec, theta, b, eta, c);
  CHECK(mean == doctest::Approx(1.0).epsilon(1e-10));
  // -L'(0) = E[sigma], by one-sided finite differences
  double h = 1e-4;
  double derivative = (1.0 - sigma_laplace(spec, theta, b, eta, c, h)) / h;
  CHECK(derivative == doctest::Approx(mean).epsilon(5e-2));
}

TEST_CASE("PPP sampler: tail mass, atom count law, ordering") {
  auto intensity = [](double v) { return std::exp(-v) / v; };
  PppSampler sampler(intensity, 0.5, 60.0);

  double exact = integrate_to_inf(intensity, 0.5);
  CHECK(sampler.mean_count_above(0.5) == doctest::Approx(exact).epsilon(1e-4));
  double exact1 = integrate_to_inf(intensity, 1.0);
  CHECK(sampler.mean_count_above(1.0) == doctest::Approx(exact1).epsilon(1e-4));

  RngStream stream(73);
  const int n = 5000;
  double count_sum = 0.0;
  for (int i = 0; i < n; ++i) {
    LimitSample sample = sampler.sample(stream);
    for (std::size_t j = 0; j < sample.points.size(); ++j) {
      CHECK(sample.points[j] >= 0.5);
      if (j > 0) CHECK(sample.points[j] <= sample.points[j - 1]);
    }
    CHECK(sample.total >= 0.0);
    count_sum += static_cast<double>(sample.points.size());
  }
  double mean_count = count_sum / n;
  CHECK(std::abs(mean_count - exact) <
        4.0 * std::sqrt(exact) / std::sqrt(static_cast<double>(n)));

  CHECK_THROWS_AS(PppSampler(intensity, 0.0, 1.0), InputError);
}
