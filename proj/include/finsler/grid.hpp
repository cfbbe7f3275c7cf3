#pragma once

#include "finsler/types.hpp"

#include <vector>

namespace finsler {

/// Axis-aligned box.
struct Box {
  Vec lower;
  Vec upper;
  Vec center() const { return 0.5 * (lower + upper); }
  Vec half_width() const { return 0.5 * (upper - lower); }
};

/// Box lattice with `resolution[i] >= 2` nodes on axis i, endpoints included.
/// Points are enumerated with the first axis varying fastest.
struct Grid {
  Box box;
  std::vector<int> resolution;

  std::size_t size() const {
    std::size_t total = 1;
    for (int r : resolution) total *= static_cast<std::size_t>(r);
    return total;
  }
  Vec point(std::size_t index) const {
    const auto n = box.lower.size();
    Vec x(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      const int r = resolution[static_cast<std::size_t>(i)];
      const auto k = static_cast<int>(index % static_cast<std::size_t>(r));
      index /= static_cast<std::size_t>(r);
      x[i] = box.lower[i] + (box.upper[i] - box.lower[i]) * k / (r - 1);
    }
    return x;
  }
  std::vector<Vec> points() const {
    std::vector<Vec> out;
    out.reserve(size());
    for (std::size_t i = 0; i < size(); ++i) out.push_back(point(i));
    return out;
  }
};

}  // namespace finsler
