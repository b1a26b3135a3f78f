#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <utility>
#include <variant>
#include <vector>

#include "splitimm/errors.hpp"
#include "splitimm/rng.hpp"

namespace splitimm {

// Lifespan distributions (the lifespan measure is Lambda = b * distribution).
struct Exponential {
  double rate;  // d
};
struct DiracFinite {
  double a;
};
struct DiracInfinite {};
struct Uniform {
  double lo, hi;
};
struct GammaDist {
  double shape, rate;
};
// Arbitrary lifespan density on (0, upper), upper finite. Must integrate to 1.
struct GenericDensity {
  std::function<double(double)> density;
  double upper;
};

using Lifespan =
    std::variant<Exponential, DiracFinite, DiracInfinite, Uniform, GammaDist, GenericDensity>;

/// Malthusian parameter and companions, produced by malthusian().
struct DerivedParams {
  double eta;    // unique positive root of psi
  double c;      // psi'(eta)
  double m;      // mean offspring count, may be +inf
  double p_ext;  // 1 - eta/b
};

// Tabulated inverse cdf for sampling a density on (0, upper).
class InverseCdf {
 public:
  InverseCdf(const std::function<double(double)>& density, double upper, int cells = 4096);
  double sample(double u) const;  // u in (0,1)

 private:
  std::vector<double> grid_, cdf_;
};

/// Lifespan measure Lambda (= birth rate b times a lifespan distribution).
/// All analytic functionals of the model live here. Immutable after
/// construction; safe for concurrent reads.
class LifespanModel {
 public:
  LifespanModel(double birth_rate, Lifespan lifespan);

  double birth_rate() const { return b_; }
  const Lifespan& lifespan() const { return life_; }

  /// Mean offspring count m = integral of r Lambda(dr); +inf for DiracInfinite.
  double mean_offspring() const;
  bool supercritical() const { return mean_offspring() > 1.0; }

  /// psi(lambda) = lambda - integral (1 - e^{-lambda r}) Lambda(dr).
  double psi(double lambda) const;
  double psi_prime(double lambda) const;

  /// Offspring pgf of the embedded BGW process: f(s) = E[e^{-b zeta (1-s)}].
  double offspring_pgf(double s) const;

  /// Density of the reproduction intensity measure mu: x -> Lambda([x, inf)).
  double birth_intensity_density(double x) const;

  // Density part of Lambda (zero for pure atoms) and the finite atom, if any.
  double lambda_density(double r) const;
  std::optional<std::pair<double, double>> lambda_atom() const;  // (location, mass)
  bool has_infinite_lifespan() const;

  double sample_lifespan(RngStream& stream) const;
  // Sample from the tilted distribution e^{-eta r} Lambda(dr) / (b - eta).
  double sample_lifespan_tilted(double eta, RngStream& stream) const;

 private:
  double b_;
  Lifespan life_;
  std::shared_ptr<InverseCdf> generic_sampler_;  // built eagerly for GenericDensity
};

/// Finds the Malthusian parameter eta (bisection on the convex bracket,
/// |psi| <= 1e-12), c = psi'(eta) and the extinction probability 1 - eta/b.
/// Throws SubcriticalError when m <= 1.
DerivedParams malthusian(const LifespanModel& model);

/// The subcritical model with lifespan measure e^{-eta r} Lambda(dr):
/// birth rate b - eta, tilted lifespan distribution. Law of a supercritical
/// splitting tree conditioned on extinction.
LifespanModel conditioned_model(const LifespanModel& model, const DerivedParams& params);

}  // namespace splitimm
