#include "splitimm/limit_laws.hpp"

#include <boost/math/special_functions/gamma.hpp>
#include <algorithm>
#include <cmath>

#include "splitimm/errors.hpp"
#include "splitimm/quadrature.hpp"

namespace splitimm {

LimitSample gem_sample(double alpha, int k, RngStream& stream) {
  if (!(alpha > 0.0) || k < 1) throw InputError("gem_sample requires alpha > 0, k >= 1");
  LimitSample out;
  out.total = 1.0;
  double remaining = 1.0;
  for (int i = 0; i < k; ++i) {
    double stick = stream.beta(1.0, alpha);
    out.points.push_back(stick * remaining);
    remaining *= 1.0 - stick;
  }
  return out;
}

std::vector<double> model2_limit_sample(double theta_over_b, const std::vector<double>& p, int k,
                                        RngStream& stream) {
  if (k < 1 || static_cast<std::size_t>(k) > p.size()) {
    throw InputError("model2_limit_sample requires 1 <= k <= len(p)");
  }
  double tail_mass = 1.0;
  std::vector<double> out;
  double remaining = 1.0;
  for (int i = 0; i < k; ++i) {
    tail_mass -= p[i];
    double beta_b = theta_over_b * std::max(tail_mass, 0.0);
    double stick = beta_b > 0.0 ? stream.beta(theta_over_b * p[i], beta_b) : 1.0;
    out.push_back(stick * remaining);
    remaining *= 1.0 - stick;
  }
  return out;
}

std::function<double(double)> ppp_scaled_intensity(double rho, double r,
                                                   std::function<double(double)> tail) {
  if (!(rho > 0.0) || !(r > 0.0)) throw InputError("ppp_scaled_intensity requires rho, r > 0");
  double scale = rho / r;
  return [scale, tail = std::move(tail)](double v) { return scale * tail(v) / v; };
}

double model3_tail_F(const ModelIII& spec, double theta, double b, double c, double v) {
  if (v < 0.0) throw InputError("model3_tail_F requires v >= 0");
  if (v == 0.0) return 1.0;
  // integral over x of (size-biased density)(x) * Q(x/b, c v).
  auto upper_tail = [b, c, v](double x) {
    if (x < 1e-300) return 0.0;
    return boost::math::gamma_q(x / b, c * v);
  };
  if (auto* fls = std::get_if<FisherLogSeries>(&spec.spec)) {
    double a = fls->a;
    return integrate_to_inf(
        [a, &upper_tail](double x) {
          // e^{-ax} underflows long before gamma_q's shape limit
          if (a * x > 700.0) return 0.0;
          return a * std::exp(-a * x) * upper_tail(x);
        },
        0.0, 1e-10);
  }
  const auto& g = std::get<GenericAbundance>(spec.spec);
  return integrate([&](double x) { return x * g.f(x) / theta * upper_tail(x); }, 0.0, g.upper,
                   1e-10);
}

double sigma_laplace(const ModelIII& spec, double theta, double b, double eta, double c,
                     double s) {
  if (s < 0.0) throw InputError("sigma_laplace requires s >= 0");
  if (s == 0.0) return 1.0;
  auto integrand = [&](double v) {
    double f = model3_tail_F(spec, theta, b, c, v);
    return f / v * (1.0 - std::exp(-s * v));  // ~ s F(0) near 0
  };
  // (0, 1] in log scale: F has a log-type derivative singularity at 0 that
  // defeats adaptive quadrature on the linear axis.
  auto log_scaled = [&](double u) {
    double v = std::exp(u);
    return v * integrand(v);
  };
  double exponent =
      integrate(log_scaled, std::log(1e-12), 0.0, 1e-9) + integrate_to_inf(integrand, 1.0, 1e-8);
  return std::exp(-(theta / eta) * exponent);
}

double sigma_mean(const ModelIII& spec, double theta, double b, double eta, double c) {
  double second_moment;
  if (auto* fls = std::get_if<FisherLogSeries>(&spec.spec)) {
    double a = fls->a;
    second_moment = 1.0 / (a * a);  // int x^2 e^{-ax}/x dx = 1/a^2
  } else {
    const auto& g = std::get<GenericAbundance>(spec.spec);
    second_moment = integrate([&g](double x) { return x * x * g.f(x); }, 0.0, g.upper, 1e-12);
  }
  (void)theta;
  return second_moment / (eta * b * c);
}

double sup_poisson_tail(double rho, double a) {
  if (!(rho > 0.0) || !(a > 0.0)) throw InputError("sup_poisson_tail requires rho, a > 0");
  return std::min(rho / a, 1.0);
}

PppSampler::PppSampler(std::function<double(double)> intensity, double threshold, double v_max)
    : intensity_(std::move(intensity)), threshold_(threshold) {
  if (!(threshold > 0.0) || !(v_max > threshold)) {
    throw InputError("PppSampler requires 0 < threshold < v_max");
  }
  below_mean_ = integrate([this](double v) { return v * intensity_(v); }, 0.0, threshold_, 1e-12);

  constexpr int kCells = 2048;
  grid_.resize(kCells + 1);
  tail_.assign(kCells + 1, 0.0);
  double log_lo = std::log(threshold), log_hi = std::log(v_max);
  for (int j = 0; j <= kCells; ++j) {
    grid_[j] = std::exp(log_lo + (log_hi - log_lo) * j / kCells);
  }
  // cumulative trapezoid from the top; mass beyond v_max is taken negligible
  // (v_max is chosen far into the exponential tail).
  for (int j = kCells - 1; j >= 0; --j) {
    double width = grid_[j + 1] - grid_[j];
    tail_[j] = tail_[j + 1] + 0.5 * width * (intensity_(grid_[j]) + intensity_(grid_[j + 1]));
  }
}

double PppSampler::mean_count_above(double u) const {
  if (u <= grid_.front()) return tail_.front();
  if (u >= grid_.back()) return 0.0;
  auto it = std::upper_bound(grid_.begin(), grid_.end(), u);
  std::size_t j = static_cast<std::size_t>(it - grid_.begin()) - 1;
  double frac = (u - grid_[j]) / (grid_[j + 1] - grid_[j]);
  return tail_[j] + frac * (tail_[j + 1] - tail_[j]);
}

LimitSample PppSampler::sample(RngStream& stream) const {
  LimitSample out;
  std::int64_t count = stream.poisson(tail_.front());
  for (std::int64_t i = 0; i < count; ++i) {
    double target = stream.u01() * tail_.front();
    // invert the decreasing tail function by binary search + interpolation:
    // find j with tail_[j] >= target > tail_[j+1]
    auto it = std::lower_bound(tail_.rbegin(), tail_.rend(), target);
    std::size_t j = tail_.size() - 1 - static_cast<std::size_t>(it - tail_.rbegin());
    if (j >= tail_.size() - 1) j = tail_.size() - 2;
    double t_lo = tail_[j], t_hi = tail_[j + 1];
    double frac = (t_lo > t_hi) ? (t_lo - target) / (t_lo - t_hi) : 0.5;
    out.points.push_back(grid_[j] + frac * (grid_[j + 1] - grid_[j]));
  }
  std::sort(out.points.rbegin(), out.points.rend());
  double sum = 0.0;
  for (double v : out.points) sum += v;
  out.total = sum + below_mean_;
  return out;
}

}  // namespace splitimm
