#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace splitimm {

/// One validation verdict. For p-value tests, passed <=> p_value >= level.
/// For z-score and threshold tests the statistic is compared against level
/// directly and p_value is NaN.
struct TestReport {
  std::string name;
  double statistic = 0.0;
  double p_value = 0.0;
  std::int64_t n = 0;
  bool passed = false;
  double level = 0.0;
};

// Kolmogorov distribution survival function Q(x) = 2 sum (-1)^{k-1} e^{-2k^2x^2}.
double kolmogorov_sf(double x);

// Chi-square survival function via the regularized upper incomplete gamma.
double chi_square_sf(double x, double dof);

/// Two-sided KS test of samples against a continuous cdf; asymptotic p-value.
TestReport ks_test(const std::string& name, std::vector<double> samples,
                   const std::function<double(double)>& cdf, double level);

/// Two-sample KS (conservative on discrete data).
TestReport ks_test_two_sample(const std::string& name, std::vector<double> a,
                              std::vector<double> b, double level);

/// Pearson chi-square of integer samples against a pmf on {0,1,...}; adjacent
/// bins are merged until every expected count reaches merge_min.
TestReport chi_square_pmf_test(const std::string& name, const std::vector<std::int64_t>& samples,
                               const std::function<double(std::int64_t)>& pmf, double merge_min,
                               double level);

/// z = (mean - target) / (sd / sqrt(n)); pass iff |z| <= z_max.
/// sd <= 0 requests the sample standard deviation.
TestReport moment_z(const std::string& name, const std::vector<double>& samples,
                    double target_mean, double sd = 0.0, double z_max = 4.0);

/// Poisson dispersion test: sum (c_i - mean)^2 / mean ~ chi2(n-1) under the
/// null; two-sided p-value.
TestReport poisson_dispersion(const std::string& name, const std::vector<std::int64_t>& counts,
                              double level);

/// Deterministic bound check: passed iff value <= bound.
TestReport threshold_report(const std::string& name, double value, double bound,
                            std::int64_t n = 0);

}  // namespace splitimm
