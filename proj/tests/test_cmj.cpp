#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "splitimm/cmj.hpp"

using namespace splitimm;

TEST_CASE("simulation is a pure function of the stream key") {
  LifespanModel model(2.0, Exponential{1.0});
  DerivedParams params = malthusian(model);
  for (std::uint64_t key : {7ULL, 123456789ULL}) {
    RngStream s1(key), s2(key);
    TreeRunResult a = simulate_tree(model, params.eta, 2.0, s1);
    TreeRunResult b = simulate_tree(model, params.eta, 2.0, s2);
    CHECK(a.population_at_t == b.population_at_t);
    CHECK(a.total_births == b.total_births);
    CHECK(a.extinct_by_t == b.extinct_by_t);
    CHECK(a.sup_scaled == b.sup_scaled);
  }
}

TEST_CASE("degenerate horizons and caps") {
  LifespanModel model(2.0, Exponential{1.0});
  DerivedParams params = malthusian(model);
  RngStream stream(1);
  TreeRunResult at_zero = simulate_tree(model, params.eta, 0.0, stream);
  CHECK(at_zero.population_at_t == 1);
  CHECK_FALSE(at_zero.extinct_by_t);
  CHECK_THROWS_AS(simulate_tree(model, params.eta, -1.0, stream), InputError);

  // deterministic exponential growth blows through a tiny cap
  LifespanModel yule(1.0, DiracInfinite{});
  DerivedParams yule_params = malthusian(yule);
  RngStream grow(2);
  CHECK_THROWS_AS(simulate_tree(yule, yule_params.eta, 30.0, grow, 10), ResourceError);
}

TEST_CASE("population/extinction bookkeeping is consistent") {
  LifespanModel model(2.0, Exponential{1.0});
  DerivedParams params = malthusian(model);
  for (std::uint64_t i = 0; i < 500; ++i) {
    RngStream stream = stream_for(99, i);
    TreeRunResult run = simulate_tree(model, params.eta, 1.5, stream);
    CHECK(run.extinct_by_t == (run.population_at_t == 0));
    CHECK(run.population_at_t <= run.total_births + 1);
    CHECK(run.sup_scaled >= 0.0);
    if (!run.extinct_by_t) {
      CHECK(run.sup_scaled >=
            std::exp(-params.eta * 1.5) * static_cast<double>(run.population_at_t));
    }
  }
}

TEST_CASE("survival is decided exactly: frequency matches eta/b") {
  LifespanModel model(2.0, Exponential{1.0});
  const std::size_t n = 4000;
  std::size_t survived = 0;
  for (std::size_t i = 0; i < n; ++i) {
    RngStream stream = stream_for(7, i);
    SurvivalRun run = simulate_tree_with_survival(model, 1.0, stream);
    if (run.survives) {
      ++survived;
      CHECK(run.population_at_t >= 1);  // a surviving tree is alive at all times
    }
  }
  double freq = static_cast<double>(survived) / static_cast<double>(n);
  CHECK(std::abs(freq - 0.5) < 4.0 * 0.5 / std::sqrt(static_cast<double>(n)));
}

TEST_CASE("total progeny of the conditioned tree has mean 1/c") {
  LifespanModel model(2.0, Exponential{1.0});
  DerivedParams params = malthusian(model);
  LifespanModel tilde = conditioned_model(model, params);
  const std::size_t n = 4000;
  double sum = 0.0, ss = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    RngStream stream = stream_for(11, i);
    auto total = static_cast<double>(total_progeny_subcritical(tilde, stream));
    CHECK(total >= 1);
    sum += total;
    ss += total * total;
  }
  double mean = sum / static_cast<double>(n);
  double sd = std::sqrt((ss - sum * mean) / static_cast<double>(n - 1));
  CHECK(std::abs(mean - 1.0 / params.c) < 4.0 * sd / std::sqrt(static_cast<double>(n)));

  RngStream scratch(1);
  CHECK_THROWS_AS(total_progeny_subcritical(model, scratch), InputError);
}

TEST_CASE("sample_AR: marginal of R is the tilted tail law") {
  LifespanModel model(2.0, Exponential{1.0});
  DerivedParams params = malthusian(model);
  RngStream stream(3);
  const int n = 5000;
  // P(A + R in dz, R in dr) = e^{-eta r} dr Lambda(dz) on 0 < r < z gives
  // R-marginal density e^{-r} Lambda([r,inf)) = 2 e^{-2r}, i.e. Exp(2)
  double sum_r = 0.0;
  for (int i = 0; i < n; ++i) {
    auto [a, r] = sample_AR(model, params, stream);
    CHECK(r > 0.0);
    CHECK(a >= 0.0);
    sum_r += r;
  }
  CHECK(std::abs(sum_r / n - 0.5) < 4.0 * 0.5 / std::sqrt(static_cast<double>(n)));

  LifespanModel sub(1.0, Exponential{2.0});
  DerivedParams fake{0.5, 0.5, 0.5, 0.5};
  CHECK_THROWS_AS(sample_AR(sub, fake, stream), SubcriticalError);
}

TEST_CASE("spine config checks the tilted-mass identity") {
  for (auto model : {LifespanModel(2.0, Exponential{1.0}), LifespanModel(2.0, DiracFinite{1.0}),
                     LifespanModel(1.0, DiracInfinite{})}) {
    DerivedParams params = malthusian(model);
    SpineConfig config = make_spine_config(model, params);
    CHECK(config.graft_right_rate ==
          doctest::Approx(model.birth_rate() - params.eta).epsilon(1e-9));
  }
}

TEST_CASE("conditioned spine trees are never extinct and grow like the Yule spine") {
  LifespanModel model(2.0, Exponential{1.0});
  DerivedParams params = malthusian(model);
  const std::size_t n = 2000;
  const double t = 1.0;
  double spine_sum = 0.0, spine_ss = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    RngStream stream = stream_for(13, i);
    SpineRunDetail detail = simulate_conditioned_spine_detail(model, params, t, stream);
    REQUIRE(detail.spine_count >= 1);
    REQUIRE(detail.run.population_at_t >= detail.spine_count);
    CHECK_FALSE(detail.run.extinct_by_t);
    auto count = static_cast<double>(detail.spine_count);
    spine_sum += count;
    spine_ss += count * count;
  }
  // Yule spine: E[count] = e^{eta t}
  double mean = spine_sum / static_cast<double>(n);
  double sd = std::sqrt((spine_ss - spine_sum * mean) / static_cast<double>(n - 1));
  CHECK(std::abs(mean - std::exp(params.eta * t)) < 4.0 * sd / std::sqrt(static_cast<double>(n)));
}

TEST_CASE("scaled limit samples: extinct trees are absent, survivors positive") {
  LifespanModel model(2.0, Exponential{1.0});
  DerivedParams params = malthusian(model);
  int present = 0;
  for (std::uint64_t i = 0; i < 400; ++i) {
    RngStream stream = stream_for(17, i);
    auto sample = scaled_limit_sample(model, params, 4.0, stream);
    if (sample) {
      ++present;
      CHECK(*sample > 0.0);
    }
  }
  CHECK(present > 100);
  CHECK(present < 300);
}
