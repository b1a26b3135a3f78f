#pragma once

#include <functional>
#include <vector>

#include "splitimm/immigration.hpp"
#include "splitimm/model.hpp"
#include "splitimm/rng.hpp"

namespace splitimm {

/// Atoms of a limiting point process (or GEM sticks) plus their total mass.
struct LimitSample {
  std::vector<double> points;
  double total = 0.0;
};

/// First k sticks of a GEM(alpha): P_i = B_i prod_{j<i} (1 - B_j) with
/// B_i i.i.d. Beta(1, alpha). Sticks come in age order; total is 1.
LimitSample gem_sample(double alpha, int k, RngStream& stream);

/// Model II stick-breaking limit: B'_i ~ Beta(theta_i, (theta/b) sum_{j>i} p_j)
/// independent; returns (P'_1 .. P'_k). For finite p this is Dirichlet.
std::vector<double> model2_limit_sample(double theta_over_b, const std::vector<double>& p, int k,
                                        RngStream& stream);

/// Intensity v -> (rho/r) F(v)/v of the image PPP of (e^{-r T_i} zeta_i).
std::function<double(double)> ppp_scaled_intensity(double rho, double r,
                                                   std::function<double(double)> tail);

/// Model III abundance-limit tail F(v) = P(G >= v) with G | Delta ~
/// Gamma(Delta/b, c) and Delta size-biased from f. F(0) = 1.
double model3_tail_F(const ModelIII& spec, double theta, double b, double c, double v);

/// Laplace transform E[e^{-s sigma}] = exp(-(theta/eta) int (F(v)/v)(1-e^{-sv}) dv).
double sigma_laplace(const ModelIII& spec, double theta, double b, double eta, double c, double s);

/// E[sigma] = (1/(eta b c)) int x^2 f(x) dx.
double sigma_mean(const ModelIII& spec, double theta, double b, double eta, double c);

/// P(sup_{t>0} A_t / t > a) = min(rho/a, 1) for a homogeneous Poisson
/// process A with rate rho.
double sup_poisson_tail(double rho, double a);

/// Sampler for a Poisson point process on (0, inf) whose intensity is
/// non-integrable at 0: atoms above the threshold are sampled exactly by
/// inverse transform on the tail measure; the sub-threshold remainder enters
/// `total` through its mean.
class PppSampler {
 public:
  PppSampler(std::function<double(double)> intensity, double threshold, double v_max);

  LimitSample sample(RngStream& stream) const;
  double mean_count_above(double u) const;  // integral of the intensity on [u, inf)

 private:
  std::function<double(double)> intensity_;
  double threshold_;
  double below_mean_;            // int_0^threshold v intensity(v) dv
  std::vector<double> grid_;     // log-spaced on [threshold, v_max]
  std::vector<double> tail_;     // tail_[j] = int_{grid_[j]}^inf intensity
};

}  // namespace splitimm
