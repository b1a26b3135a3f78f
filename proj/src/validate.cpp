#include "splitimm/validate.hpp"

#include <boost/math/special_functions/beta.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <mutex>
#include <thread>

#include "splitimm/cmj.hpp"
#include "splitimm/errors.hpp"
#include "splitimm/immigration.hpp"
#include "splitimm/limit_laws.hpp"
#include "splitimm/model.hpp"
#include "splitimm/quadrature.hpp"
#include "splitimm/scale.hpp"

namespace splitimm {

void run_replicates(std::size_t n, int workers, const std::function<void(std::size_t)>& fn) {
  if (workers <= 1 || n < 2) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::mutex error_mutex;
  std::exception_ptr first_error;
  auto worker = [&] {
    for (;;) {
      std::size_t i = next.fetch_add(1);
      if (i >= n) return;
      try {
        fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
        next.store(n);
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  int count = std::min<int>(workers, static_cast<int>(n));
  pool.reserve(count);
  for (int w = 0; w < count; ++w) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  if (first_error) std::rethrow_exception(first_error);
}

namespace {

// Stable per-test sub-seed so adding tests never reshuffles existing streams.
std::uint64_t sub_seed(std::uint64_t seed, std::uint64_t test_id) {
  return mix64(seed ^ (test_id * 0x517CC1B727220A95ULL));
}

// Test ids (append-only).
enum : std::uint64_t {
  kIdTransientExp = 1,
  kIdTransientDirac = 2,
  kIdTransientImmA = 3,
  kIdTransientImmB = 4,
  kIdLimitsTree = 5,
  kIdLimitsImm = 6,
  kIdGemAlpha1 = 7,
  kIdGemAlpha2 = 8,
  kIdModel2 = 9,
  kIdModel3 = 10,
  kIdSpineAR = 11,
  kIdSpineProgeny = 12,
  kIdSpineRejection = 13,
  kIdSpineSpine = 14,
  kIdLemmaSupA = 15,
  kIdLemmaSupB = 16,
  kIdLemmaPpp = 17,
};

LifespanModel exp_model() { return LifespanModel(2.0, Exponential{1.0}); }

struct ScaleCase {
  std::string label;
  LifespanModel model;
  std::function<double(double)> closed_w;
  double closed_valid_to;  // closed form checked on [0, closed_valid_to)
};

std::vector<TestReport> suite_scale(const ValidateOptions&) {
  std::vector<ScaleCase> cases;
  cases.push_back({"exponential-b2-d1", exp_model(), [](double t) { return 2.0 * std::exp(t) - 1.0; },
                   10.0 + 1e-12});
  cases.push_back({"dirac-infinite-b1", LifespanModel(1.0, DiracInfinite{}),
                   [](double t) { return std::exp(t); }, 10.0 + 1e-12});
  cases.push_back({"dirac-finite-b2-a1", LifespanModel(2.0, DiracFinite{1.0}),
                   [](double t) { return std::exp(2.0 * t); }, 1.0});

  std::vector<TestReport> reports;
  for (const auto& sc : cases) {
    DerivedParams params = malthusian(sc.model);
    double t_limit = 12.0 / params.eta;
    double horizon = std::max(10.0, t_limit) + 2e-3;
    ScaleGrid grid = solve_scale(sc.model, params, horizon, 1e-3);

    double max_rel = 0.0;
    for (std::size_t k = 0; k < grid.values.size(); ++k) {
      double t = grid.h * static_cast<double>(k);
      if (t >= sc.closed_valid_to || t > 10.0) break;
      double exact = sc.closed_w(t);
      max_rel = std::max(max_rel, std::abs(grid.values[k] - exact) / exact);
    }
    reports.push_back(
        threshold_report("scale/" + sc.label + "/max-rel-error", max_rel, 1e-4));

    double w_limit = w_at(grid, t_limit).first;
    double deviation = std::abs(params.c * std::exp(-params.eta * t_limit) * w_limit - 1.0);
    reports.push_back(
        threshold_report("scale/" + sc.label + "/exp-limit-deviation", deviation, 1e-3));
  }
  return reports;
}

std::vector<TestReport> suite_transient(const ValidateOptions& opts) {
  std::vector<TestReport> reports;

  struct TreeCase {
    std::string label;
    LifespanModel model;
    double t;
    std::uint64_t id;
  };
  std::vector<TreeCase> tree_cases;
  tree_cases.push_back({"exponential-b2-d1-t-ln2", exp_model(), std::log(2.0), kIdTransientExp});
  tree_cases.push_back(
      {"dirac-infinite-b1-t-2", LifespanModel(1.0, DiracInfinite{}), 2.0, kIdTransientDirac});

  const std::size_t n_tree = 10'000;
  for (const auto& tc : tree_cases) {
    DerivedParams params = malthusian(tc.model);
    ScaleGrid grid = solve_scale(tc.model, params, tc.t + 0.5, default_scale_step(params));
    std::vector<std::int64_t> populations(n_tree);
    run_replicates(n_tree, opts.workers, [&](std::size_t i) {
      RngStream stream = stream_for(sub_seed(opts.seed, tc.id), i);
      populations[i] = simulate_tree(tc.model, params.eta, tc.t, stream).population_at_t;
    });
    reports.push_back(chi_square_pmf_test(
        "transient/" + tc.label + "/pmf-chi-square", populations,
        [&](std::int64_t k) { return x_t_pmf(grid, tc.t, k); }, 5.0, 1e-3));
  }

  struct ImmCase {
    std::string label;
    double theta, t;
    std::uint64_t id;
  };
  std::vector<ImmCase> imm_cases;
  imm_cases.push_back({"immigration-theta2-t-ln2", 2.0, std::log(2.0), kIdTransientImmA});
  imm_cases.push_back({"immigration-theta1-t-1", 1.0, 1.0, kIdTransientImmB});

  LifespanModel model = exp_model();
  DerivedParams params = malthusian(model);
  ScaleGrid grid = solve_scale(model, params, 1.5, default_scale_step(params));
  const std::size_t n_imm = 10'000;
  for (const auto& ic : imm_cases) {
    ImmigrationConfig config(ic.theta, ModelI{});
    std::vector<std::int64_t> totals(n_imm);
    run_replicates(n_imm, opts.workers, [&](std::size_t i) {
      RngStream stream = stream_for(sub_seed(opts.seed, ic.id), i);
      totals[i] = simulate_immigration(model, params, config, ic.t, stream).total;
    });
    reports.push_back(chi_square_pmf_test(
        "transient/" + ic.label + "/negbin-chi-square", totals,
        [&](std::int64_t k) { return i_t_pmf(grid, ic.theta, ic.t, k); }, 5.0, 1e-3));

    double target_mean = (ic.theta / model.birth_rate()) * (w_at(grid, ic.t).first - 1.0);
    std::vector<double> values(totals.begin(), totals.end());
    reports.push_back(moment_z("transient/" + ic.label + "/mean-z", values, target_mean, 0.0, 4.0));
  }
  return reports;
}

std::vector<TestReport> suite_limits(const ValidateOptions& opts) {
  std::vector<TestReport> reports;
  LifespanModel model = exp_model();
  DerivedParams params = malthusian(model);
  const double t = 8.0 / params.eta;

  const std::size_t n_tree = 10'000;
  std::vector<double> scaled(n_tree, -1.0);  // -1 marks extinction by t
  run_replicates(n_tree, opts.workers, [&](std::size_t i) {
    RngStream stream = stream_for(sub_seed(opts.seed, kIdLimitsTree), i);
    auto sample = scaled_limit_sample(model, params, t, stream);
    if (sample) scaled[i] = *sample;
  });

  std::vector<double> indicator(n_tree), survivors;
  for (std::size_t i = 0; i < n_tree; ++i) {
    indicator[i] = scaled[i] >= 0.0 ? 1.0 : 0.0;
    if (scaled[i] >= 0.0) survivors.push_back(scaled[i]);
  }
  double p_surv = params.eta / model.birth_rate();
  reports.push_back(moment_z("limits/surviving-fraction-z", indicator, p_surv,
                             std::sqrt(p_surv * (1.0 - p_surv)), 3.0));
  reports.push_back(ks_test(
      "limits/scaled-population-vs-exp-c", survivors,
      [&](double x) { return 1.0 - std::exp(-params.c * std::max(x, 0.0)); }, 1e-3));

  const double theta = 2.0;
  const std::size_t n_imm = 5'000;
  ImmigrationConfig config(theta, ModelI{});
  std::vector<double> scaled_imm(n_imm);
  run_replicates(n_imm, opts.workers, [&](std::size_t i) {
    RngStream stream = stream_for(sub_seed(opts.seed, kIdLimitsImm), i);
    auto snapshot = simulate_immigration(model, params, config, t, stream);
    scaled_imm[i] = std::exp(-params.eta * t) * static_cast<double>(snapshot.total);
  });
  double shape = theta / model.birth_rate();
  reports.push_back(ks_test(
      "limits/scaled-immigration-vs-gamma", scaled_imm,
      [&](double x) { return x <= 0.0 ? 0.0 : boost::math::gamma_p(shape, params.c * x); },
      1e-3));
  return reports;
}

std::vector<TestReport> suite_gem(const ValidateOptions& opts) {
  std::vector<TestReport> reports;
  LifespanModel model = exp_model();
  DerivedParams params = malthusian(model);
  const double t = 8.0 / params.eta;
  const std::size_t n = 2'000;

  struct GemCase {
    double alpha;
    std::uint64_t id;
  };
  for (GemCase gc : {GemCase{1.0, kIdGemAlpha1}, GemCase{2.0, kIdGemAlpha2}}) {
    double theta = gc.alpha * model.birth_rate();
    ImmigrationConfig config(theta, ModelI{});
    std::vector<double> first(n, -1.0);
    run_replicates(n, opts.workers, [&](std::size_t i) {
      RngStream stream = stream_for(sub_seed(opts.seed, gc.id), i);
      auto snapshot = simulate_immigration(model, params, config, t, stream);
      if (snapshot.total > 0) first[i] = ranked_surviving_fractions(snapshot).front();
    });
    std::vector<double> samples;
    for (double x : first)
      if (x >= 0.0) samples.push_back(x);

    std::string tag = "gem/alpha-" + std::to_string(static_cast<int>(gc.alpha));
    double mean = 0.0;
    for (double x : samples) mean += x;
    mean /= static_cast<double>(samples.size());
    reports.push_back(threshold_report(tag + "/oldest-fraction-mean-error",
                                       std::abs(mean - 1.0 / (1.0 + gc.alpha)), 0.02,
                                       static_cast<std::int64_t>(samples.size())));
    reports.push_back(ks_test(
        tag + "/oldest-fraction-vs-beta-1-alpha", samples,
        [&](double x) { return 1.0 - std::pow(1.0 - std::clamp(x, 0.0, 1.0), gc.alpha); },
        1e-3));
  }
  return reports;
}

std::vector<TestReport> suite_model2(const ValidateOptions& opts) {
  std::vector<TestReport> reports;
  LifespanModel model = exp_model();
  DerivedParams params = malthusian(model);
  const double t = 8.0 / params.eta;
  const double theta = 2.0;  // theta/b = 1
  const std::size_t n = 2'000;
  ImmigrationConfig config(theta, ModelII{{0.5, 0.5}});

  std::vector<double> type1(n), type2(n);
  run_replicates(n, opts.workers, [&](std::size_t i) {
    RngStream stream = stream_for(sub_seed(opts.seed, kIdModel2), i);
    auto snapshot = simulate_immigration(model, params, config, t, stream);
    auto fractions = type_aggregated_fractions(snapshot, 2);
    type1[i] = fractions[0];
    type2[i] = fractions[1];
  });

  double a = (theta / model.birth_rate()) * 0.5;
  reports.push_back(ks_test(
      "model2/type1-fraction-vs-beta", type1,
      [&](double x) {
        if (x <= 0.0) return 0.0;
        if (x >= 1.0) return 1.0;
        return boost::math::ibeta(a, a, x);
      },
      1e-3));
  reports.push_back(moment_z("model2/type1-mean-z", type1, 0.5, 0.0, 3.0));
  reports.push_back(moment_z("model2/type2-mean-z", type2, 0.5, 0.0, 3.0));
  return reports;
}

std::vector<TestReport> suite_model3(const ValidateOptions& opts) {
  std::vector<TestReport> reports;
  LifespanModel model = exp_model();
  DerivedParams params = malthusian(model);
  const double t = 8.0 / params.eta;
  const std::size_t n = 2'000;

  ModelIII spec3{FisherLogSeries{1.0}};
  ImmigrationConfig config(spec3);
  double theta = config.theta();

  std::vector<double> sigma_hat(n);
  run_replicates(n, opts.workers, [&](std::size_t i) {
    RngStream stream = stream_for(sub_seed(opts.seed, kIdModel3), i);
    auto snapshot = simulate_immigration(model, params, config, t, stream);
    sigma_hat[i] = std::exp(-params.eta * t) * static_cast<double>(snapshot.total);
  });

  double mean_target = sigma_mean(spec3, theta, model.birth_rate(), params.eta, params.c);
  reports.push_back(moment_z("model3/sigma-mean-z", sigma_hat, mean_target, 0.0, 3.0));

  for (double s : {0.5, 1.0, 2.0}) {
    std::vector<double> transformed(n);
    for (std::size_t i = 0; i < n; ++i) transformed[i] = std::exp(-s * sigma_hat[i]);
    double target =
        sigma_laplace(spec3, theta, model.birth_rate(), params.eta, params.c, s);
    char label[64];
    std::snprintf(label, sizeof(label), "model3/laplace-z-s-%g", s);
    reports.push_back(moment_z(label, transformed, target, 0.0, 3.0));
  }
  return reports;
}

std::vector<TestReport> suite_spine(const ValidateOptions& opts) {
  std::vector<TestReport> reports;
  LifespanModel model = exp_model();
  DerivedParams params = malthusian(model);

  // sample_AR moments, 100 chunks x 1000 draws for worker-count independence
  const std::size_t chunks = 100, per_chunk = 1000;
  std::vector<double> a_vals(chunks * per_chunk), r_vals(chunks * per_chunk);
  run_replicates(chunks, opts.workers, [&](std::size_t i) {
    RngStream stream = stream_for(sub_seed(opts.seed, kIdSpineAR), i);
    for (std::size_t j = 0; j < per_chunk; ++j) {
      auto [a, r] = sample_AR(model, params, stream);
      a_vals[i * per_chunk + j] = a;
      r_vals[i * per_chunk + j] = r;
    }
  });
  double mean_a = (params.m - 1.0) / params.eta;
  double mean_r = params.c / params.eta;
  reports.push_back(moment_z("spine/A-mean-z", a_vals, mean_a, 0.0, 4.0));
  reports.push_back(moment_z("spine/R-mean-z", r_vals, mean_r, 0.0, 4.0));

  // conditioned-tree total progeny, mean 1/c
  LifespanModel tilted = conditioned_model(model, params);
  const std::size_t n_prog = 10'000;
  std::vector<double> progeny(n_prog);
  run_replicates(n_prog, opts.workers, [&](std::size_t i) {
    RngStream stream = stream_for(sub_seed(opts.seed, kIdSpineProgeny), i);
    progeny[i] = static_cast<double>(total_progeny_subcritical(tilted, stream));
  });
  reports.push_back(moment_z("spine/total-progeny-mean-z", progeny, 1.0 / params.c, 0.0, 4.0));

  // X(3) | survival: spine decomposition vs rejection sampling
  const double t = 3.0;
  const std::size_t n_keep = 5'000, attempts = 25'000;
  std::vector<double> rejected(attempts, -1.0);
  run_replicates(attempts, opts.workers, [&](std::size_t i) {
    RngStream stream = stream_for(sub_seed(opts.seed, kIdSpineRejection), i);
    auto run = simulate_tree_with_survival(model, t, stream);
    if (run.survives) rejected[i] = static_cast<double>(run.population_at_t);
  });
  std::vector<double> rejection_samples;
  for (double x : rejected) {
    if (x >= 0.0) rejection_samples.push_back(x);
    if (rejection_samples.size() == n_keep) break;
  }
  if (rejection_samples.size() < n_keep) {
    throw NumericalError("spine suite: rejection sampler yielded too few surviving trees");
  }

  std::vector<double> spine_samples(n_keep);
  run_replicates(n_keep, opts.workers, [&](std::size_t i) {
    RngStream stream = stream_for(sub_seed(opts.seed, kIdSpineSpine), i);
    spine_samples[i] =
        static_cast<double>(simulate_conditioned_spine(model, params, t, stream).population_at_t);
  });
  reports.push_back(ks_test_two_sample("spine/conditioned-vs-rejection-ks", spine_samples,
                                       rejection_samples, 1e-3));
  return reports;
}

std::vector<TestReport> suite_lemmas(const ValidateOptions& opts) {
  std::vector<TestReport> reports;

  struct SupCase {
    double rho, a;
    std::uint64_t id;
  };
  const std::size_t n_sup = 10'000;
  for (SupCase sc : {SupCase{1.0, 2.0, kIdLemmaSupA}, SupCase{2.0, 1.0, kIdLemmaSupB}}) {
    double horizon = 1000.0 / sc.rho;
    std::vector<double> exceeded(n_sup);
    run_replicates(n_sup, opts.workers, [&](std::size_t i) {
      RngStream stream = stream_for(sub_seed(opts.seed, sc.id), i);
      double s = 0.0, sup_ratio = 0.0;
      std::int64_t count = 0;
      for (;;) {
        s += stream.exponential(sc.rho);
        if (s > horizon) break;
        ++count;
        sup_ratio = std::max(sup_ratio, static_cast<double>(count) / s);
      }
      exceeded[i] = sup_ratio > sc.a ? 1.0 : 0.0;
    });
    double freq = 0.0;
    for (double x : exceeded) freq += x;
    freq /= static_cast<double>(n_sup);
    char label[64];
    std::snprintf(label, sizeof(label), "lemmas/sup-poisson-rho-%g-a-%g", sc.rho, sc.a);
    reports.push_back(threshold_report(label, std::abs(freq - sup_poisson_tail(sc.rho, sc.a)),
                                       0.02, static_cast<std::int64_t>(n_sup)));
  }

  // image PPP of (e^{-T_i} zeta_i), zeta ~ Exp(1): atoms >= u follow a Poisson
  // law with mean integral of the mapped intensity on [u, inf)
  const double u = 0.5, horizon = 40.0;
  auto intensity = ppp_scaled_intensity(1.0, 1.0, [](double v) { return std::exp(-v); });
  double expected = integrate_to_inf(intensity, u);
  const std::size_t n_ppp = 10'000;
  std::vector<std::int64_t> counts(n_ppp);
  run_replicates(n_ppp, opts.workers, [&](std::size_t i) {
    RngStream stream = stream_for(sub_seed(opts.seed, kIdLemmaPpp), i);
    double s = 0.0;
    std::int64_t count = 0;
    for (;;) {
      s += stream.exponential(1.0);
      if (s > horizon) break;
      if (std::exp(-s) * stream.exponential(1.0) >= u) ++count;
    }
    counts[i] = count;
  });
  std::vector<double> count_values(counts.begin(), counts.end());
  reports.push_back(moment_z("lemmas/ppp-atom-count-mean-z", count_values, expected,
                             std::sqrt(expected), 4.0));
  reports.push_back(poisson_dispersion("lemmas/ppp-atom-count-dispersion", counts, 1e-3));
  return reports;
}

}  // namespace

const std::vector<std::string>& suite_names() {
  static const std::vector<std::string> names = {
      "scale", "transient", "limits", "gem", "model2", "model3", "spine", "lemmas", "all"};
  return names;
}

std::vector<TestReport> run_suite(const std::string& suite, const ValidateOptions& options) {
  if (suite == "scale") return suite_scale(options);
  if (suite == "transient") return suite_transient(options);
  if (suite == "limits") return suite_limits(options);
  if (suite == "gem") return suite_gem(options);
  if (suite == "model2") return suite_model2(options);
  if (suite == "model3") return suite_model3(options);
  if (suite == "spine") return suite_spine(options);
  if (suite == "lemmas") return suite_lemmas(options);
  if (suite == "all") {
    std::vector<TestReport> reports;
    for (const auto& name : suite_names()) {
      if (name == "all") continue;
      auto part = run_suite(name, options);
      reports.insert(reports.end(), part.begin(), part.end());
    }
    return reports;
  }
  throw InputError("unknown validation suite: " + suite);
}

}  // namespace splitimm
