#pragma once

// Counter-based random stream: each draw hashes (seed, counter), so scans can
// fan out over parameters and still reproduce byte-identical output for a
// given seed.

#include <cstdint>

#include "octoroll/algebra.hpp"

namespace octoroll {

class CounterRng {
 public:
  explicit CounterRng(std::uint64_t seed) : seed_(seed) {}

  // splitmix64 finalizer over the (seed, counter) pair
  std::uint64_t next_u64() {
    std::uint64_t z = seed_ + 0x9e3779b97f4a7c15ull * (++counter_);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Uniform on S^3 by normalized rejection sampling of the unit ball.
  Quaternion unit_quaternion() {
    for (;;) {
      Quaternion q{uniform(-1.0, 1.0), uniform(-1.0, 1.0), uniform(-1.0, 1.0),
                   uniform(-1.0, 1.0)};
      double n2 = q.norm_sq();
      if (n2 > 1e-6 && n2 <= 1.0) return normalized(q);
    }
  }

  // Uniform on the imaginary unit sphere.
  Quaternion unit_imaginary() {
    for (;;) {
      Quaternion q{0.0, uniform(-1.0, 1.0), uniform(-1.0, 1.0), uniform(-1.0, 1.0)};
      double n2 = q.norm_sq();
      if (n2 > 1e-6 && n2 <= 1.0) return normalized(q);
    }
  }

  Quaternion imaginary(double scale) {
    return {0.0, scale * uniform(-1.0, 1.0), scale * uniform(-1.0, 1.0),
            scale * uniform(-1.0, 1.0)};
  }

  SplitOctonion split_octonion(double scale) {
    Quaternion a{uniform(-1.0, 1.0), uniform(-1.0, 1.0), uniform(-1.0, 1.0),
                 uniform(-1.0, 1.0)};
    Quaternion b{uniform(-1.0, 1.0), uniform(-1.0, 1.0), uniform(-1.0, 1.0),
                 uniform(-1.0, 1.0)};
    return {a * scale, b * scale};
  }

 private:
  std::uint64_t seed_;
  std::uint64_t counter_ = 0;
};

}  // namespace octoroll
