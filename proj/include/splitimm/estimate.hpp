#pragma once

#include <cstddef>
#include <vector>

namespace splitimm {

struct AlphaEstimate {
  double alpha_hat;
  double ci_low, ci_high;  // 95% from observed Fisher information K / alpha^2
  std::size_t k_used;
};

/// MLE of the GEM parameter from age-ranked surviving fractions P_1..P_K.
/// Sticks B_i = P_i / (1 - P_1 - ... - P_{i-1}) are treated as i.i.d.
/// Beta(1, alpha); alpha_hat = -K / sum log(1 - B_i). When the fractions sum
/// to 1 the last (degenerate) stick is dropped.
AlphaEstimate estimate_alpha(const std::vector<double>& fractions);

}  // namespace splitimm
