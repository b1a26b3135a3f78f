#pragma once

#include <cmath>
#include <cstdint>

namespace splitimm {

// Counter-derived random stream. The generator is splitmix64, so a stream is
// fully determined by its 64-bit key and behaves identically on every
// platform. Distinct keys give statistically independent streams.
class RngStream {
 public:
  explicit RngStream(std::uint64_t key) : state_(key) {}

  std::uint64_t next_u64() {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  // Uniform on the open interval (0,1).
  double u01() { return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * u01(); }

  double exponential(double rate) { return -std::log(u01()) / rate; }

  double normal() {
    double u1 = u01();
    double u2 = u01();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
  }

  std::int64_t poisson(double mean);
  double gamma(double shape, double rate);
  double beta(double a, double b);

 private:
  std::uint64_t state_;
};

// Stream key for replicate i: splitmix-style mix of (seed XOR i*0x9E3779B97F4A7C15).
// The constant is fixed; identical across platforms and worker counts.
inline RngStream stream_for(std::uint64_t seed, std::uint64_t i) {
  return RngStream(seed ^ (i * 0x9E3779B97F4A7C15ULL));
}

// 64-bit mixer used to derive sub-seeds (e.g. one per validation test).
inline std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

}  // namespace splitimm
