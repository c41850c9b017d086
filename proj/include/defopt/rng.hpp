#pragma once

#include <cstdint>
#include <random>

namespace defopt {

// Seedable uniform source used by the stochastic solver. Backed by the
// 64-bit Mersenne Twister (mt19937_64), whose output sequence for a given
// seed is fixed by the C++ standard, so runs reproduce bit-for-bit across
// platforms. Doubles are built from the top 53 bits of each draw instead
// of uniform_real_distribution, which the standard does not pin down.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  // Uniform in [0, 1).
  double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  // Uniform in [lo, hi).
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

 private:
  std::mt19937_64 engine_;
};

}  // namespace defopt
