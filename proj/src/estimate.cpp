#include "splitimm/estimate.hpp"

#include <cmath>

#include "splitimm/errors.hpp"

namespace splitimm {

AlphaEstimate estimate_alpha(const std::vector<double>& fractions) {
  if (fractions.empty()) throw InputError("estimate_alpha: need at least one fraction");
  for (double p : fractions) {
    if (!(p > 0.0)) throw InputError("estimate_alpha: fractions must be positive");
  }

  // Suffix sums: the stick denominator 1 - P_1 - ... - P_{i-1} equals
  // leftover + sum_{j >= i} P_j. Computing it this way is numerically stable;
  // the forward subtractive recursion loses a factor e^{E[-log(1-B)]} of
  // precision per stick and is unusable beyond ~70 sticks.
  std::vector<double> suffix(fractions.size() + 1, 0.0);
  for (std::size_t i = fractions.size(); i-- > 0;) {
    suffix[i] = suffix[i + 1] + fractions[i];
  }
  double sum = suffix[0];
  if (sum > 1.0 + 1e-9) throw InputError("estimate_alpha: fractions sum above 1");

  std::size_t k = fractions.size();
  double leftover = 1.0 - sum;
  if (sum >= 1.0 - 1e-12) {
    // last stick consumed the remainder; it carries no information
    if (k == 1) throw InputError("estimate_alpha: single exhaustive fraction is uninformative");
    --k;
    leftover = 0.0;
  }

  double log_sum = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    double denominator = leftover + suffix[i];
    double stick = fractions[i] / denominator;
    if (!(stick > 0.0 && stick < 1.0)) {
      throw InputError("estimate_alpha: recovered stick outside (0,1)");
    }
    log_sum += std::log1p(-stick);
  }
  double alpha = -static_cast<double>(k) / log_sum;
  double se = alpha / std::sqrt(static_cast<double>(k));
  return AlphaEstimate{alpha, alpha - 1.959963984540054 * se, alpha + 1.959963984540054 * se, k};
}

}  // namespace splitimm
