#include "splitimm/model.hpp"

#include <boost/math/special_functions/gamma.hpp>
#include <algorithm>
#include <cmath>
#include <limits>

#include "splitimm/quadrature.hpp"

namespace splitimm {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double gamma_pdf(double x, double shape, double rate) {
  if (x <= 0.0) return 0.0;
  return std::exp(shape * std::log(rate) + (shape - 1.0) * std::log(x) - rate * x -
                  std::lgamma(shape));
}

}  // namespace

InverseCdf::InverseCdf(const std::function<double(double)>& density, double upper, int cells) {
  if (!(upper > 0.0) || !std::isfinite(upper)) {
    throw InputError("GenericDensity requires a finite positive upper support bound");
  }
  grid_.resize(cells + 1);
  cdf_.resize(cells + 1);
  double h = upper / cells;
  grid_[0] = 0.0;
  cdf_[0] = 0.0;
  double prev = density(1e-12 * upper);
  for (int k = 1; k <= cells; ++k) {
    grid_[k] = k * h;
    double cur = density(grid_[k]);
    cdf_[k] = cdf_[k - 1] + 0.5 * h * (prev + cur);
    prev = cur;
  }
  double total = cdf_.back();
  if (!(total > 0.0) || !std::isfinite(total)) {
    throw InputError("lifespan density has non-positive or non-finite mass");
  }
  for (auto& v : cdf_) v /= total;
}

double InverseCdf::sample(double u) const {
  auto it = std::lower_bound(cdf_.begin(), cdf_.end(), u);
  if (it == cdf_.begin()) return grid_.front();
  if (it == cdf_.end()) return grid_.back();
  std::size_t k = static_cast<std::size_t>(it - cdf_.begin());
  double c0 = cdf_[k - 1], c1 = cdf_[k];
  double w = (c1 > c0) ? (u - c0) / (c1 - c0) : 0.5;
  return grid_[k - 1] + w * (grid_[k] - grid_[k - 1]);
}

LifespanModel::LifespanModel(double birth_rate, Lifespan lifespan)
    : b_(birth_rate), life_(std::move(lifespan)) {
  if (!(b_ > 0.0)) throw InputError("birth rate must be positive");
  if (auto* u = std::get_if<Uniform>(&life_)) {
    if (!(0.0 <= u->lo && u->lo < u->hi)) throw InputError("Uniform lifespan needs 0 <= lo < hi");
  } else if (auto* g = std::get_if<GammaDist>(&life_)) {
    if (!(g->shape > 0.0 && g->rate > 0.0)) throw InputError("Gamma lifespan needs k, r > 0");
  } else if (auto* d = std::get_if<DiracFinite>(&life_)) {
    if (!(d->a > 0.0)) throw InputError("Dirac lifespan needs a > 0");
  } else if (auto* e = std::get_if<Exponential>(&life_)) {
    if (!(e->rate > 0.0)) throw InputError("Exponential lifespan needs d > 0");
  } else if (auto* gd = std::get_if<GenericDensity>(&life_)) {
    double mass = integrate(gd->density, 0.0, gd->upper, 1e-12);
    if (std::abs(mass - 1.0) > 1e-8) {
      throw InputError("GenericDensity must integrate to 1, got " + std::to_string(mass));
    }
    generic_sampler_ = std::make_shared<InverseCdf>(gd->density, gd->upper);
  }
}

double LifespanModel::mean_offspring() const {
  return std::visit(
      [this](const auto& life) -> double {
        using T = std::decay_t<decltype(life)>;
        if constexpr (std::is_same_v<T, Exponential>) {
          return b_ / life.rate;
        } else if constexpr (std::is_same_v<T, DiracFinite>) {
          return b_ * life.a;
        } else if constexpr (std::is_same_v<T, DiracInfinite>) {
          return kInf;
        } else if constexpr (std::is_same_v<T, Uniform>) {
          return b_ * 0.5 * (life.lo + life.hi);
        } else if constexpr (std::is_same_v<T, GammaDist>) {
          return b_ * life.shape / life.rate;
        } else {
          return b_ * integrate([&life](double r) { return r * life.density(r); }, 0.0,
                                life.upper, 1e-12);
        }
      },
      life_);
}

double LifespanModel::psi(double lambda) const {
  if (lambda < 0.0) throw InputError("psi requires lambda >= 0");
  if (lambda == 0.0) return 0.0;
  return std::visit(
      [this, lambda](const auto& life) -> double {
        using T = std::decay_t<decltype(life)>;
        if constexpr (std::is_same_v<T, Exponential>) {
          return lambda - b_ * lambda / (life.rate + lambda);
        } else if constexpr (std::is_same_v<T, DiracFinite>) {
          return lambda - b_ * (1.0 - std::exp(-lambda * life.a));
        } else if constexpr (std::is_same_v<T, DiracInfinite>) {
          return lambda - b_;
        } else if constexpr (std::is_same_v<T, Uniform>) {
          double width = life.hi - life.lo;
          double integral =
              width - (std::exp(-lambda * life.lo) - std::exp(-lambda * life.hi)) / lambda;
          return lambda - b_ * integral / width;
        } else if constexpr (std::is_same_v<T, GammaDist>) {
          return lambda -
                 b_ * (1.0 - std::pow(life.rate / (life.rate + lambda), life.shape));
        } else {
          double integral = integrate(
              [&life, lambda](double r) { return (1.0 - std::exp(-lambda * r)) * life.density(r); },
              0.0, life.upper, 1e-12);
          return lambda - b_ * integral;
        }
      },
      life_);
}

double LifespanModel::psi_prime(double lambda) const {
  return std::visit(
      [this, lambda](const auto& life) -> double {
        using T = std::decay_t<decltype(life)>;
        if constexpr (std::is_same_v<T, Exponential>) {
          double s = life.rate + lambda;
          return 1.0 - b_ * life.rate / (s * s);
        } else if constexpr (std::is_same_v<T, DiracFinite>) {
          return 1.0 - b_ * life.a * std::exp(-lambda * life.a);
        } else if constexpr (std::is_same_v<T, DiracInfinite>) {
          return 1.0;
        } else if constexpr (std::is_same_v<T, Uniform>) {
          double width = life.hi - life.lo;
          auto term = [lambda](double r) {
            return (r / lambda + 1.0 / (lambda * lambda)) * std::exp(-lambda * r);
          };
          double integral = term(life.lo) - term(life.hi);
          return 1.0 - b_ * integral / width;
        } else if constexpr (std::is_same_v<T, GammaDist>) {
          return 1.0 - b_ * (life.shape / life.rate) *
                           std::pow(life.rate / (life.rate + lambda), life.shape + 1.0);
        } else {
          double integral = integrate(
              [&life, lambda](double r) { return r * std::exp(-lambda * r) * life.density(r); },
              0.0, life.upper, 1e-12);
          return 1.0 - b_ * integral;
        }
      },
      life_);
}

double LifespanModel::offspring_pgf(double s) const {
  if (s < 0.0 || s > 1.0) throw InputError("offspring pgf requires s in [0,1]");
  if (s == 1.0) return 1.0;
  // f(s) = b^{-1} integral e^{-u r} Lambda(dr) with u = b(1-s),
  // and integral e^{-u r} Lambda(dr) = psi(u) - u + b.
  double u = b_ * (1.0 - s);
  return (psi(u) - u + b_) / b_;
}

double LifespanModel::birth_intensity_density(double x) const {
  if (x < 0.0) throw InputError("birth intensity density requires x >= 0");
  return std::visit(
      [this, x](const auto& life) -> double {
        using T = std::decay_t<decltype(life)>;
        if constexpr (std::is_same_v<T, Exponential>) {
          return b_ * std::exp(-life.rate * x);
        } else if constexpr (std::is_same_v<T, DiracFinite>) {
          return x <= life.a ? b_ : 0.0;
        } else if constexpr (std::is_same_v<T, DiracInfinite>) {
          return b_;
        } else if constexpr (std::is_same_v<T, Uniform>) {
          if (x >= life.hi) return 0.0;
          double lo = std::max(x, life.lo);
          return b_ * (life.hi - lo) / (life.hi - life.lo);
        } else if constexpr (std::is_same_v<T, GammaDist>) {
          if (x == 0.0) return b_;
          return b_ * boost::math::gamma_q(life.shape, life.rate * x);
        } else {
          if (x >= life.upper) return 0.0;
          return b_ * integrate(life.density, x, life.upper, 1e-12);
        }
      },
      life_);
}

double LifespanModel::lambda_density(double r) const {
  return std::visit(
      [this, r](const auto& life) -> double {
        using T = std::decay_t<decltype(life)>;
        if constexpr (std::is_same_v<T, Exponential>) {
          return r < 0.0 ? 0.0 : b_ * life.rate * std::exp(-life.rate * r);
        } else if constexpr (std::is_same_v<T, Uniform>) {
          return (r >= life.lo && r <= life.hi) ? b_ / (life.hi - life.lo) : 0.0;
        } else if constexpr (std::is_same_v<T, GammaDist>) {
          return b_ * gamma_pdf(r, life.shape, life.rate);
        } else if constexpr (std::is_same_v<T, GenericDensity>) {
          return (r > 0.0 && r < life.upper) ? b_ * life.density(r) : 0.0;
        } else {
          return 0.0;  // pure atom families
        }
      },
      life_);
}

std::optional<std::pair<double, double>> LifespanModel::lambda_atom() const {
  if (auto* d = std::get_if<DiracFinite>(&life_)) return std::make_pair(d->a, b_);
  return std::nullopt;
}

bool LifespanModel::has_infinite_lifespan() const {
  return std::holds_alternative<DiracInfinite>(life_);
}

double LifespanModel::sample_lifespan(RngStream& stream) const {
  return std::visit(
      [this, &stream](const auto& life) -> double {
        using T = std::decay_t<decltype(life)>;
        if constexpr (std::is_same_v<T, Exponential>) {
          return stream.exponential(life.rate);
        } else if constexpr (std::is_same_v<T, DiracFinite>) {
          return life.a;
        } else if constexpr (std::is_same_v<T, DiracInfinite>) {
          return kInf;
        } else if constexpr (std::is_same_v<T, Uniform>) {
          return stream.uniform(life.lo, life.hi);
        } else if constexpr (std::is_same_v<T, GammaDist>) {
          return stream.gamma(life.shape, life.rate);
        } else {
          return generic_sampler_->sample(stream.u01());
        }
      },
      life_);
}

double LifespanModel::sample_lifespan_tilted(double eta, RngStream& stream) const {
  return std::visit(
      [this, eta, &stream](const auto& life) -> double {
        using T = std::decay_t<decltype(life)>;
        if constexpr (std::is_same_v<T, Exponential>) {
          return stream.exponential(life.rate + eta);
        } else if constexpr (std::is_same_v<T, DiracFinite>) {
          return life.a;
        } else if constexpr (std::is_same_v<T, DiracInfinite>) {
          throw InputError("tilted measure e^{-eta r} delta_inf has zero mass");
        } else if constexpr (std::is_same_v<T, Uniform>) {
          // Truncated Exp(eta) on [lo, hi] by inverse transform.
          double elo = std::exp(-eta * life.lo);
          double ehi = std::exp(-eta * life.hi);
          double u = stream.u01();
          return -std::log(elo - u * (elo - ehi)) / eta;
        } else if constexpr (std::is_same_v<T, GammaDist>) {
          return stream.gamma(life.shape, life.rate + eta);
        } else {
          // Rejection against the untilted density: accept with prob e^{-eta r}.
          for (;;) {
            double r = generic_sampler_->sample(stream.u01());
            if (stream.u01() < std::exp(-eta * r)) return r;
          }
        }
      },
      life_);
}

DerivedParams malthusian(const LifespanModel& model) {
  double m = model.mean_offspring();
  if (!(m > 1.0)) {
    throw SubcriticalError("model is not supercritical: mean offspring m = " + std::to_string(m));
  }
  // Bracket [lo, hi] with psi(lo) < 0 < psi(hi); doubling is guaranteed to
  // terminate by convexity of psi.
  double hi = 1.0;
  int guard = 0;
  while (model.psi(hi) <= 0.0) {
    hi *= 2.0;
    if (++guard > 200) throw NumericalError("failed to bracket the Malthusian root from above");
  }
  double lo = hi * 0.5;
  guard = 0;
  while (model.psi(lo) >= 0.0) {
    lo *= 0.5;
    if (++guard > 200) throw NumericalError("failed to bracket the Malthusian root from below");
  }
  double eta = 0.5 * (lo + hi);
  for (int it = 0; it < 400; ++it) {
    double value = model.psi(eta);
    if (std::abs(value) <= 1e-12) break;
    (value < 0.0 ? lo : hi) = eta;
    eta = 0.5 * (lo + hi);
    if (hi - lo < 1e-16 * std::max(1.0, hi)) break;
  }
  if (std::abs(model.psi(eta)) > 1e-10) {
    throw NumericalError("bisection for the Malthusian parameter did not converge");
  }
  DerivedParams params;
  params.eta = eta;
  params.c = model.psi_prime(eta);
  params.m = m;
  params.p_ext = std::clamp(1.0 - eta / model.birth_rate(), 0.0, 1.0);
  return params;
}

LifespanModel conditioned_model(const LifespanModel& model, const DerivedParams& params) {
  double b_tilde = model.birth_rate() - params.eta;
  if (!(b_tilde > 0.0)) {
    throw InputError("conditioned model is degenerate: b - eta <= 0");
  }
  double eta = params.eta;
  const Lifespan& life = model.lifespan();
  if (auto* e = std::get_if<Exponential>(&life)) {
    return LifespanModel(b_tilde, Exponential{e->rate + eta});
  }
  if (auto* d = std::get_if<DiracFinite>(&life)) {
    return LifespanModel(b_tilde, DiracFinite{d->a});
  }
  if (auto* g = std::get_if<GammaDist>(&life)) {
    return LifespanModel(b_tilde, GammaDist{g->shape, g->rate + eta});
  }
  if (auto* u = std::get_if<Uniform>(&life)) {
    double lo = u->lo, hi = u->hi;
    double norm = (std::exp(-eta * lo) - std::exp(-eta * hi)) / (eta * (hi - lo));
    auto density = [lo, hi, eta, norm](double r) {
      if (r < lo || r > hi) return 0.0;
      return std::exp(-eta * r) / (norm * (hi - lo));
    };
    return LifespanModel(b_tilde, GenericDensity{density, hi});
  }
  if (auto* gd = std::get_if<GenericDensity>(&life)) {
    auto base = gd->density;
    double upper = gd->upper;
    double norm = integrate([&base, eta](double r) { return std::exp(-eta * r) * base(r); }, 0.0,
                            upper, 1e-12);
    auto density = [base, eta, norm](double r) { return std::exp(-eta * r) * base(r) / norm; };
    return LifespanModel(b_tilde, GenericDensity{density, upper});
  }
  throw InputError("conditioned model undefined for infinite lifespans");
}

}  // namespace splitimm
