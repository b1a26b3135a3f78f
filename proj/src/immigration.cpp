#include "splitimm/immigration.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "splitimm/errors.hpp"
#include "splitimm/quadrature.hpp"

namespace splitimm {

namespace {

void check_theta(double theta) {
  if (!(theta > 0.0)) throw InputError("immigration rate theta must be positive");
}

}  // namespace

ImmigrationConfig::ImmigrationConfig(double theta, ModelI model) : theta_(theta), model_(model) {
  check_theta(theta);
}

ImmigrationConfig::ImmigrationConfig(double theta, ModelII model)
    : theta_(theta), model_(std::move(model)) {
  check_theta(theta);
  const auto& head = std::get<ModelII>(model_).head;
  double sum = 0.0;
  for (double p : head) {
    if (!(p > 0.0)) throw InputError("Model II type probabilities must be positive");
    sum += p;
  }
  if (sum > 1.0 + 1e-12) throw InputError("Model II type probabilities sum above 1");
}

ImmigrationConfig::ImmigrationConfig(ModelIII model) : theta_(0.0), model_(std::move(model)) {
  const auto& spec = std::get<ModelIII>(model_).spec;
  if (auto* fls = std::get_if<FisherLogSeries>(&spec)) {
    if (!(fls->a > 0.0)) throw InputError("Fisher log-series needs a > 0");
    theta_ = 1.0 / fls->a;
  } else {
    const auto& g = std::get<GenericAbundance>(spec);
    theta_ = integrate([&g](double x) { return x * g.f(x); }, 0.0, g.upper, 1e-12);
    check_theta(theta_);
    double norm = theta_;
    delta_sampler_ = std::make_shared<InverseCdf>(
        [&g, norm](double x) { return x * g.f(x) / norm; }, g.upper);
  }
}

double ImmigrationConfig::sample_delta(RngStream& stream) const {
  const auto& spec = std::get<ModelIII>(model_).spec;
  if (auto* fls = std::get_if<FisherLogSeries>(&spec)) return stream.exponential(fls->a);
  return delta_sampler_->sample(stream.u01());
}

PopulationSnapshot simulate_immigration(const LifespanModel& model, const DerivedParams& params,
                                        const ImmigrationConfig& config, double t,
                                        RngStream& stream, std::int64_t cap) {
  if (t < 0.0) throw InputError("simulate_immigration requires t >= 0");
  PopulationSnapshot snapshot;
  snapshot.t = t;

  std::int64_t arrivals = stream.poisson(config.theta() * t);
  std::vector<double> times(arrivals);
  for (auto& x : times) x = t * stream.u01();
  std::sort(times.begin(), times.end());

  const ModelII* m2 = std::get_if<ModelII>(&config.model());
  int next_label = 0;
  for (double arrival : times) {
    FamilyRecord family{arrival, 0, 0, 0.0};
    if (config.is_model3()) {
      family.type_label = next_label++;
      family.delta = config.sample_delta(stream);
      // Rate-Delta immigration subprocess on [arrival, t]; every burst's tree
      // is merged into this one family record.
      std::int64_t bursts = stream.poisson(family.delta * (t - arrival));
      for (std::int64_t i = 0; i < bursts; ++i) {
        double at = stream.uniform(arrival, t);
        family.abundance +=
            simulate_tree(model, params.eta, t - at, stream, cap).population_at_t;
      }
    } else {
      if (m2 != nullptr) {
        double u = stream.u01();
        double acc = 0.0;
        family.type_label = kTailTypeLabel;
        for (std::size_t i = 0; i < m2->head.size(); ++i) {
          acc += m2->head[i];
          if (u < acc) {
            family.type_label = static_cast<int>(i);
            break;
          }
        }
      } else {
        family.type_label = next_label++;
      }
      family.abundance = simulate_tree(model, params.eta, t - arrival, stream, cap).population_at_t;
    }
    snapshot.total += family.abundance;
    snapshot.families.push_back(family);
  }
  return snapshot;
}

double i_t_pmf(const ScaleGrid& grid, double theta, double t, std::int64_t n) {
  check_theta(theta);
  double w = w_at(grid, t).first;
  double k = theta / grid.b;
  double p = 1.0 - 1.0 / w;
  if (p <= 0.0) return n == 0 ? 1.0 : 0.0;
  double log_pmf = std::lgamma(k + static_cast<double>(n)) - std::lgamma(k) -
                   std::lgamma(static_cast<double>(n) + 1.0) +
                   static_cast<double>(n) * std::log(p) - k * std::log(w);
  return std::exp(log_pmf);
}

std::vector<double> ranked_surviving_fractions(const PopulationSnapshot& snapshot) {
  if (snapshot.total <= 0) throw InputError("ranked_surviving_fractions: empty population");
  std::vector<double> fractions;
  for (const auto& family : snapshot.families) {
    if (family.abundance > 0) {
      fractions.push_back(static_cast<double>(family.abundance) /
                          static_cast<double>(snapshot.total));
    }
  }
  return fractions;
}

std::vector<double> type_aggregated_fractions(const PopulationSnapshot& snapshot, int num_types) {
  if (snapshot.total <= 0) throw InputError("type_aggregated_fractions: empty population");
  std::vector<double> fractions(num_types, 0.0);
  for (const auto& family : snapshot.families) {
    if (family.type_label >= 0 && family.type_label < num_types) {
      fractions[family.type_label] +=
          static_cast<double>(family.abundance) / static_cast<double>(snapshot.total);
    }
  }
  return fractions;
}

}  // namespace splitimm
