#include "splitimm/stats.hpp"

#include <boost/math/special_functions/gamma.hpp>
#include <algorithm>
#include <cmath>
#include <limits>

#include "splitimm/errors.hpp"

namespace splitimm {

namespace {
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
}

double kolmogorov_sf(double x) {
  if (x <= 0.0) return 1.0;
  if (x < 0.18) return 1.0;  // series is numerically 1 here
  double sum = 0.0;
  for (int k = 1; k <= 200; ++k) {
    double term = std::exp(-2.0 * k * k * x * x);
    sum += (k % 2 == 1) ? term : -term;
    if (term < 1e-16) break;
  }
  return std::clamp(2.0 * sum, 0.0, 1.0);
}

double chi_square_sf(double x, double dof) {
  if (x <= 0.0) return 1.0;
  return boost::math::gamma_q(dof / 2.0, x / 2.0);
}

TestReport ks_test(const std::string& name, std::vector<double> samples,
                   const std::function<double(double)>& cdf, double level) {
  if (samples.size() < 20) throw InputError("ks_test needs at least 20 samples");
  std::sort(samples.begin(), samples.end());
  auto n = static_cast<double>(samples.size());
  double d = 0.0;
  double prev_f = -1.0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    double f = cdf(samples[i]);
    if (f < prev_f - 1e-12) throw InputError("ks_test: cdf is not nondecreasing on the samples");
    prev_f = f;
    d = std::max(d, std::abs(f - (static_cast<double>(i) + 1.0) / n));
    d = std::max(d, std::abs(f - static_cast<double>(i) / n));
  }
  TestReport report{name, d, kolmogorov_sf(std::sqrt(n) * d),
                    static_cast<std::int64_t>(samples.size()), false, level};
  report.passed = report.p_value >= level;
  return report;
}

TestReport ks_test_two_sample(const std::string& name, std::vector<double> a,
                              std::vector<double> b, double level) {
  if (a.size() < 20 || b.size() < 20) throw InputError("two-sample ks_test needs >= 20 each");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
  double d = 0.0;
  std::size_t i = 0, j = 0;
  while (i < a.size() && j < b.size()) {
    double x = std::min(a[i], b[j]);
    while (i < a.size() && a[i] <= x) ++i;
    while (j < b.size() && b[j] <= x) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  double en = std::sqrt(na * nb / (na + nb));
  TestReport report{name, d, kolmogorov_sf(en * d),
                    static_cast<std::int64_t>(a.size() + b.size()), false, level};
  report.passed = report.p_value >= level;
  return report;
}

TestReport chi_square_pmf_test(const std::string& name, const std::vector<std::int64_t>& samples,
                               const std::function<double(std::int64_t)>& pmf, double merge_min,
                               double level) {
  if (samples.empty()) throw InputError("chi_square_pmf_test: no samples");
  std::int64_t max_value = *std::max_element(samples.begin(), samples.end());
  auto n = static_cast<double>(samples.size());

  std::vector<double> observed(max_value + 1, 0.0);
  for (std::int64_t s : samples) observed[s] += 1.0;
  std::vector<double> expected(max_value + 1, 0.0);
  double cum = 0.0;
  for (std::int64_t k = 0; k < max_value; ++k) {
    expected[k] = n * pmf(k);
    cum += pmf(k);
  }
  expected[max_value] = n * std::max(1.0 - cum, 0.0);  // tail bin {>= max}

  // merge adjacent bins until every expected count reaches merge_min
  std::vector<double> obs_merged, exp_merged;
  double o = 0.0, e = 0.0;
  for (std::size_t k = 0; k < expected.size(); ++k) {
    o += observed[k];
    e += expected[k];
    if (e >= merge_min) {
      obs_merged.push_back(o);
      exp_merged.push_back(e);
      o = e = 0.0;
    }
  }
  if (e > 0.0 || o > 0.0) {
    if (!exp_merged.empty()) {
      obs_merged.back() += o;
      exp_merged.back() += e;
    } else {
      obs_merged.push_back(o);
      exp_merged.push_back(e);
    }
  }
  if (exp_merged.size() < 2) throw InputError("chi_square_pmf_test: fewer than 2 merged bins");

  double statistic = 0.0;
  for (std::size_t k = 0; k < exp_merged.size(); ++k) {
    double diff = obs_merged[k] - exp_merged[k];
    statistic += diff * diff / exp_merged[k];
  }
  double dof = static_cast<double>(exp_merged.size()) - 1.0;
  TestReport report{name, statistic, chi_square_sf(statistic, dof),
                    static_cast<std::int64_t>(samples.size()), false, level};
  report.passed = report.p_value >= level;
  return report;
}

TestReport moment_z(const std::string& name, const std::vector<double>& samples,
                    double target_mean, double sd, double z_max) {
  if (samples.size() < 100) throw InputError("moment_z needs at least 100 samples");
  auto n = static_cast<double>(samples.size());
  double mean = 0.0;
  for (double x : samples) mean += x;
  mean /= n;
  if (sd <= 0.0) {
    double ss = 0.0;
    for (double x : samples) ss += (x - mean) * (x - mean);
    sd = std::sqrt(ss / (n - 1.0));
  }
  double z;
  if (sd == 0.0) {
    z = (mean == target_mean) ? 0.0 : std::numeric_limits<double>::infinity();
  } else {
    z = (mean - target_mean) / (sd / std::sqrt(n));
  }
  TestReport report{name, z, kNaN, static_cast<std::int64_t>(samples.size()),
                    std::abs(z) <= z_max, z_max};
  return report;
}

TestReport poisson_dispersion(const std::string& name, const std::vector<std::int64_t>& counts,
                              double level) {
  if (counts.size() < 50) throw InputError("poisson_dispersion needs at least 50 counts");
  auto n = static_cast<double>(counts.size());
  double mean = 0.0;
  for (std::int64_t c : counts) mean += static_cast<double>(c);
  mean /= n;
  if (mean <= 0.0) throw InputError("poisson_dispersion: zero mean");
  double statistic = 0.0;
  for (std::int64_t c : counts) {
    double diff = static_cast<double>(c) - mean;
    statistic += diff * diff / mean;
  }
  double upper = chi_square_sf(statistic, n - 1.0);
  double p = 2.0 * std::min(upper, 1.0 - upper);
  TestReport report{name, statistic, p, static_cast<std::int64_t>(counts.size()), p >= level,
                    level};
  return report;
}

TestReport threshold_report(const std::string& name, double value, double bound, std::int64_t n) {
  return TestReport{name, value, kNaN, n, std::isfinite(value) && value <= bound, bound};
}

}  // namespace splitimm
