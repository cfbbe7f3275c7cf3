#pragma once

#include "finsler/types.hpp"

#include <string>

namespace finsler {

/// One global coordinate chart: an axis-aligned open box, axes may be unbounded.
class ManifoldChart {
 public:
  ManifoldChart() = default;
  ManifoldChart(Vec lower, Vec upper);

  /// The whole of R^n.
  static ManifoldChart full(int dimension);

  int dimension() const { return static_cast<int>(lower_.size()); }
  const Vec& lower() const { return lower_; }
  const Vec& upper() const { return upper_; }

  bool contains(const Vec& x) const;
  void require_contains(const Vec& x, const char* what) const;
  std::string describe() const;

 private:
  Vec lower_;
  Vec upper_;
};

struct TangentVector {
  Vec base;
  Vec components;
};

struct Covector {
  Vec base;
  Vec components;
};

}  // namespace finsler
