#pragma once

#include <cstdint>
#include <optional>
#include <utility>

#include "splitimm/model.hpp"

namespace splitimm {

constexpr std::int64_t kDefaultPopulationCap = 100'000'000;

/// Outcome of one splitting-tree run observed at time t.
struct TreeRunResult {
  std::int64_t population_at_t = 0;
  bool extinct_by_t = false;
  std::int64_t total_births = 0;  // births on (0, t]
  double sup_scaled = 0.0;        // max over event times of e^{-eta s} X(s)
  double outcome_horizon = 0.0;
};

/// Spine-decomposition parameters for a supercritical model. The conditioned
/// lifespan measure e^{-eta r} Lambda(dr) has mass b - eta; construction
/// verifies that identity to 1e-10.
struct SpineConfig {
  double graft_right_rate;    // b - eta
  double conditioned_mass;    // integral of e^{-eta r} Lambda(dr)
};

SpineConfig make_spine_config(const LifespanModel& model, const DerivedParams& params);

/// Exact event-driven simulation of a splitting tree up to time t. Birth
/// counts per individual are Poisson(b * exposed life) with uniform order
/// statistics for the times. Deterministic given the stream.
/// `ancestor_lifespan` overrides the root's lifespan draw (used by grafts).
TreeRunResult simulate_tree(const LifespanModel& model, double eta, double t, RngStream& stream,
                            std::int64_t cap = kDefaultPopulationCap,
                            std::optional<double> ancestor_lifespan = std::nullopt);

/// Population at t together with the tree's survival, decided exactly through
/// the embedded BGW process (a generation reaching 64 individuals is declared
/// surviving; the misclassification probability is at most p_ext^64).
struct SurvivalRun {
  std::int64_t population_at_t = 0;
  bool survives = false;
};
SurvivalRun simulate_tree_with_survival(const LifespanModel& model, double t, RngStream& stream,
                                        std::int64_t cap = kDefaultPopulationCap);

/// Total individuals ever born in a subcritical tree, simulated to extinction.
std::int64_t total_progeny_subcritical(const LifespanModel& model_tilde, RngStream& stream,
                                       std::int64_t cap = kDefaultPopulationCap);

/// Draws (A, R) with joint law P(A + R in dz, R in dr) = e^{-eta r} dr Lambda(dz),
/// 0 < r < z. A may be +inf when lifespans are infinite.
std::pair<double, double> sample_AR(const LifespanModel& model, const DerivedParams& params,
                                    RngStream& stream);

/// Tree conditioned on non-extinction via the spine decomposition: a rate-eta
/// Yule spine with conditioned subcritical trees grafted at rate b - eta on
/// the right and along an (A, R)-renewal process on the left.
TreeRunResult simulate_conditioned_spine(const LifespanModel& model, const DerivedParams& params,
                                         double t, RngStream& stream,
                                         std::int64_t cap = kDefaultPopulationCap);

// Same, also reporting the Yule spine size at t.
struct SpineRunDetail {
  TreeRunResult run;
  std::int64_t spine_count = 0;
};
SpineRunDetail simulate_conditioned_spine_detail(const LifespanModel& model,
                                                 const DerivedParams& params, double t,
                                                 RngStream& stream,
                                                 std::int64_t cap = kDefaultPopulationCap);

/// e^{-eta t} X(t) when the tree is alive at t, absent otherwise. Surviving
/// samples approximate Exp(c) for eta * t large.
std::optional<double> scaled_limit_sample(const LifespanModel& model, const DerivedParams& params,
                                          double t, RngStream& stream,
                                          std::int64_t cap = kDefaultPopulationCap);

}  // namespace splitimm
