#include "splitimm/rng.hpp"

namespace splitimm {

std::int64_t RngStream::poisson(double mean) {
  if (mean <= 0.0) return 0;
  // Split large means so the product method never underflows.
  if (mean > 500.0) {
    double half = mean * 0.5;
    return poisson(half) + poisson(mean - half);
  }
  double limit = std::exp(-mean);
  double prod = 1.0;
  std::int64_t k = -1;
  do {
    ++k;
    prod *= u01();
  } while (prod > limit);
  return k;
}

double RngStream::gamma(double shape, double rate) {
  // Marsaglia-Tsang squeeze; shape < 1 boosted via the u^(1/shape) trick.
  if (shape < 1.0) {
    double g = gamma(shape + 1.0, rate);
    return g * std::pow(u01(), 1.0 / shape);
  }
  double d = shape - 1.0 / 3.0;
  double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    double x, v;
    do {
      x = normal();
      v = 1.0 + c * x;
    } while (v <= 0.0);
    v = v * v * v;
    double u = u01();
    double x2 = x * x;
    if (u < 1.0 - 0.0331 * x2 * x2) return d * v / rate;
    if (std::log(u) < 0.5 * x2 + d * (1.0 - v + std::log(v))) return d * v / rate;
  }
}

double RngStream::beta(double a, double b) {
  double x = gamma(a, 1.0);
  double y = gamma(b, 1.0);
  return x / (x + y);
}

}  // namespace splitimm
