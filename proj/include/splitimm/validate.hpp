#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "splitimm/stats.hpp"

namespace splitimm {

struct ValidateOptions {
  std::uint64_t seed = 42;
  int workers = 1;
};

/// Suite names accepted by run_suite, "all" last.
const std::vector<std::string>& suite_names();

/// Runs one named validation suite. Every randomized check derives its
/// streams from (seed, replicate index) only, so the reports are identical
/// for any worker count.
std::vector<TestReport> run_suite(const std::string& suite, const ValidateOptions& options);

/// Executes fn(0..n-1) on a worker pool; fn must only touch per-index state.
void run_replicates(std::size_t n, int workers, const std::function<void(std::size_t)>& fn);

}  // namespace splitimm
