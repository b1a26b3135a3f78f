#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <set>

#include "splitimm/immigration.hpp"

using namespace splitimm;

namespace {

LifespanModel base_model() { return LifespanModel(2.0, Exponential{1.0}); }

ScaleGrid exp_grid(double horizon) {
  LifespanModel model = base_model();
  DerivedParams params = malthusian(model);
  return solve_scale(model, params, horizon, 1e-3);
}

double negbin_pmf(double p, double r, std::int64_t k) {
  // C(k+r-1, k) (1-p)^r p^k via lgamma
  double lg = std::lgamma(static_cast<double>(k) + r) - std::lgamma(r) -
              std::lgamma(static_cast<double>(k) + 1.0);
  return std::exp(lg + r * std::log1p(-p) + static_cast<double>(k) * std::log(p));
}

}  // namespace

TEST_CASE("configuration validation") {
  CHECK_THROWS_AS(ImmigrationConfig(0.0, ModelI{}), InputError);
  CHECK_THROWS_AS(ImmigrationConfig(-1.0, ModelI{}), InputError);
  CHECK_THROWS_AS(ImmigrationConfig(1.0, ModelII{{0.5, -0.1}}), InputError);
  CHECK_THROWS_AS(ImmigrationConfig(1.0, ModelII{{0.8, 0.8}}), InputError);
  CHECK_THROWS_AS(ImmigrationConfig(ModelIII{FisherLogSeries{0.0}}), InputError);
}

TEST_CASE("Model III: theta and the size-biased pick for Fisher's log-series") {
  ImmigrationConfig config(ModelIII{FisherLogSeries{2.0}});
  CHECK(config.theta() == doctest::Approx(0.5));  // theta = 1/a

  // Delta ~ Exp(a): check the mean
  RngStream stream(5);
  const int n = 20000;
  double sum = 0.0;
  for (int i = 0; i < n; ++i) sum += config.sample_delta(stream);
  CHECK(std::abs(sum / n - 0.5) < 4.0 * 0.5 / std::sqrt(static_cast<double>(n)));
}

TEST_CASE("I(t) pmf is the negative binomial in W(t)") {
  ScaleGrid grid = exp_grid(1.2);
  for (double theta : {2.0, 0.75}) {
    double t = 1.0;
    double w = w_at(grid, t).first;
    double p = 1.0 - 1.0 / w;
    double r = theta / 2.0;
    double total = 0.0;
    for (std::int64_t k = 0; k <= 400; ++k) {
      double pmf = i_t_pmf(grid, theta, t, k);
      CHECK(pmf == doctest::Approx(negbin_pmf(p, r, k)).epsilon(1e-10));
      total += pmf;
    }
    CHECK(total == doctest::Approx(1.0).epsilon(1e-8));
    // P(I(t) = 0) = W(t)^{-theta/b}
    CHECK(i_t_pmf(grid, theta, t, 0) == doctest::Approx(std::pow(w, -r)).epsilon(1e-10));
  }
}

TEST_CASE("snapshot invariants for all three immigration mechanisms") {
  LifespanModel model = base_model();
  DerivedParams params = malthusian(model);
  std::vector<ImmigrationConfig> configs = {
      ImmigrationConfig(2.0, ModelI{}),
      ImmigrationConfig(2.0, ModelII{{0.3, 0.3}}),  // 0.4 tail mass
      ImmigrationConfig(ModelIII{FisherLogSeries{1.0}}),
  };
  for (const auto& config : configs) {
    for (std::uint64_t i = 0; i < 50; ++i) {
      RngStream stream = stream_for(31, i);
      PopulationSnapshot snapshot = simulate_immigration(model, params, config, 2.0, stream);
      CHECK(snapshot.t == 2.0);
      std::int64_t total = 0;
      double prev_time = 0.0;
      for (const auto& family : snapshot.families) {
        CHECK(family.immigration_time >= prev_time);
        CHECK(family.immigration_time <= 2.0);
        CHECK(family.abundance >= 0);
        prev_time = family.immigration_time;
        total += family.abundance;
        if (config.is_model3()) {
          CHECK(family.delta > 0.0);
        } else {
          CHECK(family.delta == 0.0);
        }
      }
      CHECK(total == snapshot.total);
    }
  }
}

TEST_CASE("Model I founds a new type per immigrant") {
  LifespanModel model = base_model();
  DerivedParams params = malthusian(model);
  ImmigrationConfig config(3.0, ModelI{});
  RngStream stream(41);
  PopulationSnapshot snapshot = simulate_immigration(model, params, config, 3.0, stream);
  std::set<int> labels;
  for (const auto& family : snapshot.families) {
    CHECK(family.type_label >= 0);
    CHECK(labels.insert(family.type_label).second);  // all distinct
  }
}

TEST_CASE("Model II labels live in the declared head or the tail") {
  LifespanModel model = base_model();
  DerivedParams params = malthusian(model);
  ImmigrationConfig config(2.0, ModelII{{0.3, 0.3}});
  bool saw_tail = false;
  for (std::uint64_t i = 0; i < 100; ++i) {
    RngStream stream = stream_for(43, i);
    PopulationSnapshot snapshot = simulate_immigration(model, params, config, 2.0, stream);
    for (const auto& family : snapshot.families) {
      bool head = family.type_label == 0 || family.type_label == 1;
      bool tail = family.type_label == kTailTypeLabel;
      CHECK((head || tail));
      saw_tail = saw_tail || tail;
    }
  }
  CHECK(saw_tail);  // 40% tail mass shows up in 100 runs
}

TEST_CASE("ranked fractions: age order, positivity, unit sum") {
  LifespanModel model = base_model();
  DerivedParams params = malthusian(model);
  ImmigrationConfig config(2.0, ModelI{});
  for (std::uint64_t i = 0; i < 50; ++i) {
    RngStream stream = stream_for(47, i);
    PopulationSnapshot snapshot = simulate_immigration(model, params, config, 4.0, stream);
    if (snapshot.total == 0) continue;
    auto fractions = ranked_surviving_fractions(snapshot);
    double sum = 0.0;
    for (double f : fractions) {
      CHECK(f > 0.0);
      sum += f;
    }
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
  }
  PopulationSnapshot empty;
  CHECK_THROWS_AS(ranked_surviving_fractions(empty), InputError);
  CHECK_THROWS_AS(type_aggregated_fractions(empty, 2), InputError);
}

TEST_CASE("type aggregation partitions the population") {
  LifespanModel model = base_model();
  DerivedParams params = malthusian(model);
  ImmigrationConfig config(2.0, ModelII{{0.5, 0.5}});
  for (std::uint64_t i = 0; i < 50; ++i) {
    RngStream stream = stream_for(53, i);
    PopulationSnapshot snapshot = simulate_immigration(model, params, config, 3.0, stream);
    if (snapshot.total == 0) continue;
    auto fractions = type_aggregated_fractions(snapshot, 2);
    REQUIRE(fractions.size() == 2);
    // no tail mass: the two types exhaust the population
    CHECK(fractions[0] + fractions[1] == doctest::Approx(1.0).epsilon(1e-12));
  }
}
