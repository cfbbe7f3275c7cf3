#pragma once

#include "finsler/types.hpp"

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

namespace finsler {

/// Seeded generator whose output is identical across standard libraries
/// (std distributions are implementation-defined, so none are used).
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Uniform in [0, 1).
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  double normal() {
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

  /// Uniform direction on the Euclidean unit sphere.
  Vec direction(int n) {
    Vec v(n);
    do {
      for (int i = 0; i < n; ++i) v[i] = normal();
    } while (v.norm() < 1e-8);
    return v / v.norm();
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace finsler
