#pragma once

#include <cstdint>
#include <functional>
#include <variant>
#include <vector>

#include "splitimm/cmj.hpp"
#include "splitimm/scale.hpp"

namespace splitimm {

// Model I: every immigrant founds a family of a brand-new type.
struct ModelI {};

// Model II: immigrant types drawn from a fixed probability vector. The head
// lists explicit types; any remaining mass is a shared "tail" label (-1),
// excluded from per-type statistics.
struct ModelII {
  std::vector<double> head;
};

// Model III mainland abundance densities. Fisher's log-series f(x) = e^{-ax}/x
// has theta = 1/a and size-biased pick Delta ~ Exp(a).
struct FisherLogSeries {
  double a;
};
struct GenericAbundance {
  std::function<double(double)> f;  // abundance density on (0, upper)
  double upper;
};
struct ModelIII {
  std::variant<FisherLogSeries, GenericAbundance> spec;
};

/// Immigration configuration; theta is the total immigration rate (for
/// Model III it equals the integral of x f(x) dx and is derived from f).
class ImmigrationConfig {
 public:
  ImmigrationConfig(double theta, ModelI model);
  ImmigrationConfig(double theta, ModelII model);
  explicit ImmigrationConfig(ModelIII model);

  double theta() const { return theta_; }
  const std::variant<ModelI, ModelII, ModelIII>& model() const { return model_; }
  bool is_model3() const { return std::holds_alternative<ModelIII>(model_); }

  // Model III only: size-biased immigration-rate draw Delta ~ x f(x) / theta.
  double sample_delta(RngStream& stream) const;

 private:
  double theta_;
  std::variant<ModelI, ModelII, ModelIII> model_;
  std::shared_ptr<InverseCdf> delta_sampler_;  // generic abundance only
};

constexpr int kTailTypeLabel = -1;

struct FamilyRecord {
  double immigration_time;
  int type_label;
  std::int64_t abundance;
  double delta;  // Model III immigration rate, 0 otherwise
};

/// Per-family population state at observation time t.
struct PopulationSnapshot {
  double t = 0.0;
  std::vector<FamilyRecord> families;  // ordered by increasing immigration time
  std::int64_t total = 0;
};

/// Poisson(theta) arrivals on [0, t]; each founds a family evolving by
/// simulate_tree (Model III: a rate-Delta immigration subprocess merged into
/// one family record).
PopulationSnapshot simulate_immigration(const LifespanModel& model, const DerivedParams& params,
                                        const ImmigrationConfig& config, double t,
                                        RngStream& stream,
                                        std::int64_t cap = kDefaultPopulationCap);

/// Exact transient law of I(t) for Models I/II: negative binomial with
/// parameters 1 - 1/W(t) and theta/b.
double i_t_pmf(const ScaleGrid& grid, double theta, double t, std::int64_t n);

/// Fractions of surviving families, oldest first. Errors when total is 0.
std::vector<double> ranked_surviving_fractions(const PopulationSnapshot& snapshot);

/// Model II: abundance fractions aggregated per type label 0..num_types-1.
std::vector<double> type_aggregated_fractions(const PopulationSnapshot& snapshot, int num_types);

}  // namespace splitimm
