#include "splitimm/cmj.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "splitimm/errors.hpp"
#include "splitimm/quadrature.hpp"

namespace splitimm {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr int kSurvivalGeneration = 64;  // p_ext^64 misclassification bound

struct Individual {
  double birth;
  double lifespan;
};

}  // namespace

SpineConfig make_spine_config(const LifespanModel& model, const DerivedParams& params) {
  double b = model.birth_rate();
  double eta = params.eta;
  // mass of e^{-eta r} Lambda(dr) = b - psi-integral at eta = b - eta.
  double mass = b - (eta - model.psi(eta));
  if (std::abs(mass - (b - eta)) > 1e-10) {
    throw NumericalError("conditioned lifespan measure mass deviates from b - eta");
  }
  return SpineConfig{b - eta, mass};
}

TreeRunResult simulate_tree(const LifespanModel& model, double eta, double t, RngStream& stream,
                            std::int64_t cap, std::optional<double> ancestor_lifespan) {
  if (t < 0.0) throw InputError("simulate_tree requires t >= 0");
  const double b = model.birth_rate();

  TreeRunResult result;
  result.outcome_horizon = t;

  // (time, +1 birth / -1 death) events, swept afterwards for the diagnostic.
  std::vector<std::pair<double, int>> events;
  std::vector<Individual> pending;
  double root_life = ancestor_lifespan ? *ancestor_lifespan : model.sample_lifespan(stream);
  pending.push_back({0.0, root_life});
  std::int64_t processed = 0;

  while (!pending.empty()) {
    Individual ind = pending.back();
    pending.pop_back();
    if (++processed > cap) {
      throw ResourceError("population cap exceeded in simulate_tree");
    }
    events.emplace_back(ind.birth, +1);
    double death = ind.birth + ind.lifespan;
    if (death <= t) events.emplace_back(death, -1);
    if (death > t) ++result.population_at_t;

    double exposed = std::min(ind.lifespan, t - ind.birth);
    if (exposed > 0.0) {
      std::int64_t births = stream.poisson(b * exposed);
      for (std::int64_t i = 0; i < births; ++i) {
        double at = ind.birth + exposed * stream.u01();
        pending.push_back({at, model.sample_lifespan(stream)});
      }
      result.total_births += births;
    }
  }
  result.extinct_by_t = result.population_at_t == 0;

  std::sort(events.begin(), events.end(), [](const auto& a, const auto& b2) {
    if (a.first != b2.first) return a.first < b2.first;
    return a.second > b2.second;  // births before deaths at ties
  });
  std::int64_t alive = 0;
  double sup = 0.0;
  for (const auto& [time, delta] : events) {
    alive += delta;
    if (delta > 0) sup = std::max(sup, std::exp(-eta * time) * static_cast<double>(alive));
  }
  result.sup_scaled = sup;
  return result;
}

SurvivalRun simulate_tree_with_survival(const LifespanModel& model, double t, RngStream& stream,
                                        std::int64_t cap) {
  if (t < 0.0) throw InputError("simulate_tree_with_survival requires t >= 0");
  const double b = model.birth_rate();

  SurvivalRun out;
  std::vector<Individual> current, next;
  current.push_back({0.0, model.sample_lifespan(stream)});
  std::int64_t processed = 0;
  bool decided = false;

  while (!current.empty()) {
    double min_birth = kInf;
    next.clear();
    for (const Individual& ind : current) {
      if (++processed > cap) throw ResourceError("population cap exceeded in survival run");
      if (ind.birth <= t && ind.birth + ind.lifespan > t) ++out.population_at_t;
      min_birth = std::min(min_birth, ind.birth);
      if (std::isinf(ind.lifespan)) {
        out.survives = true;
        decided = true;
      }
      // Full lifespans drive the exact BGW survival decision; once decided,
      // only births inside [0, t] can affect the population count.
      double exposed = ind.lifespan;
      if (decided) exposed = std::min(exposed, std::max(0.0, t - ind.birth));
      std::int64_t births = stream.poisson(b * exposed);
      for (std::int64_t i = 0; i < births; ++i) {
        double at = ind.birth + exposed * stream.u01();
        next.push_back({at, model.sample_lifespan(stream)});
      }
    }
    if (!decided && next.size() >= kSurvivalGeneration) {
      out.survives = true;
      decided = true;
    }
    // Once survival is settled, only branches that can still touch [0, t]
    // matter for the population count.
    if (decided && min_birth > t) break;
    if (decided) {
      std::erase_if(next, [t](const Individual& ind) { return ind.birth > t; });
    }
    current.swap(next);
  }
  return out;
}

std::int64_t total_progeny_subcritical(const LifespanModel& model_tilde, RngStream& stream,
                                       std::int64_t cap) {
  if (!(model_tilde.mean_offspring() < 1.0)) {
    throw InputError("total_progeny_subcritical requires a subcritical model");
  }
  const double b = model_tilde.birth_rate();
  std::int64_t total = 1;
  std::int64_t generation = 1;
  while (generation > 0) {
    std::int64_t next = 0;
    for (std::int64_t i = 0; i < generation; ++i) {
      next += stream.poisson(b * model_tilde.sample_lifespan(stream));
    }
    total += next;
    generation = next;
    if (total > cap) throw ResourceError("runaway growth: input is not subcritical");
  }
  return total;
}

std::pair<double, double> sample_AR(const LifespanModel& model, const DerivedParams& params,
                                    RngStream& stream) {
  if (!model.supercritical()) throw SubcriticalError("sample_AR requires a supercritical model");
  double eta = params.eta;
  // Z = A + R from (1 - e^{-eta z}) Lambda(dz) / eta, by rejection against
  // the lifespan distribution (acceptance probability eta / b).
  double z;
  for (;;) {
    z = model.sample_lifespan(stream);
    if (stream.u01() < 1.0 - std::exp(-eta * z)) break;
  }
  // R | Z = z has density eta e^{-eta r} / (1 - e^{-eta z}) on (0, z).
  double r = -std::log(1.0 - stream.u01() * (1.0 - std::exp(-eta * z))) / eta;
  return {z - r, r};
}

SpineRunDetail simulate_conditioned_spine_detail(const LifespanModel& model,
                                                 const DerivedParams& params, double t,
                                                 RngStream& stream, std::int64_t cap) {
  if (t < 0.0) throw InputError("simulate_conditioned_spine requires t >= 0");
  SpineConfig spine = make_spine_config(model, params);
  const double eta = params.eta;

  // Rate-eta Yule spine on [0, t]; every spine branch is immortal.
  std::vector<double> branch_births{0.0};
  {
    double s = 0.0;
    for (;;) {
      s += stream.exponential(eta * static_cast<double>(branch_births.size()));
      if (s > t) break;
      branch_births.push_back(s);
    }
  }

  SpineRunDetail detail;
  detail.spine_count = static_cast<std::int64_t>(branch_births.size());
  TreeRunResult& result = detail.run;
  result.outcome_horizon = t;
  result.population_at_t = detail.spine_count;

  if (spine.graft_right_rate <= 1e-14) {
    // Pure-birth case (eta = b): nothing to graft.
    result.extinct_by_t = false;
    return detail;
  }
  LifespanModel tilde = conditioned_model(model, params);

  std::int64_t budget_used = detail.spine_count;
  auto graft = [&](double at, std::optional<double> root_life) {
    TreeRunResult sub =
        simulate_tree(tilde, 0.0, t - at, stream, cap - budget_used, root_life);
    budget_used += sub.total_births + 1;
    result.population_at_t += sub.population_at_t;
    result.total_births += sub.total_births + 1;
  };

  for (double tau : branch_births) {
    // Right grafts: Poisson rate b - eta over the branch's life [tau, t].
    std::int64_t n_right = stream.poisson(spine.graft_right_rate * (t - tau));
    std::vector<double> times(n_right);
    for (auto& x : times) x = stream.uniform(tau, t);
    std::sort(times.begin(), times.end());
    for (double at : times) graft(at, std::nullopt);

    // Left grafts: an A-renewal process from tau; the tree grafted at each
    // renewal has ancestor lifespan R from the joint (A, R) draw.
    double s = tau;
    for (;;) {
      auto [a, r] = sample_AR(model, params, stream);
      s += a;
      if (!(s <= t)) break;
      graft(s, r);
    }
  }
  result.extinct_by_t = false;
  return detail;
}

TreeRunResult simulate_conditioned_spine(const LifespanModel& model, const DerivedParams& params,
                                         double t, RngStream& stream, std::int64_t cap) {
  return simulate_conditioned_spine_detail(model, params, t, stream, cap).run;
}

std::optional<double> scaled_limit_sample(const LifespanModel& model, const DerivedParams& params,
                                          double t, RngStream& stream, std::int64_t cap) {
  TreeRunResult run = simulate_tree(model, params.eta, t, stream, cap);
  if (run.population_at_t == 0) return std::nullopt;
  return std::exp(-params.eta * t) * static_cast<double>(run.population_at_t);
}

}  // namespace splitimm
