#pragma once

// Central finite differences with one Richardson extrapolation step (h, 2h),
// giving fourth-order accurate first and second derivatives.

#include "finsler/types.hpp"

#include <cmath>
#include <limits>

namespace finsler::numdiff {

/// Step for fourth-order first derivatives of smooth O(1) functions.
inline double first_order_step() { return std::pow(std::numeric_limits<double>::epsilon(), 0.2); }
/// Step for fourth-order second derivatives of smooth O(1) functions.
inline double second_order_step() { return std::pow(std::numeric_limits<double>::epsilon(), 1.0 / 6.0); }

template <class Fn>
double derivative(Fn&& f, double x, double h) {
  auto d = [&](double s) { return (f(x + s) - f(x - s)) / (2.0 * s); };
  return (4.0 * d(h) - d(2.0 * h)) / 3.0;
}

template <class Fn>
Vec gradient(Fn&& f, const Vec& x, double h) {
  const auto n = x.size();
  Vec g(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    auto along = [&](double s) {
      Vec z = x;
      z[i] += s;
      return f(z);
    };
    g[i] = derivative(along, 0.0, h);
  }
  return g;
}

template <class Fn>
Mat hessian(Fn&& f, const Vec& x, double h) {
  const auto n = x.size();
  Mat H(n, n);
  const double f0 = f(x);
  for (Eigen::Index i = 0; i < n; ++i) {
    auto d2 = [&](double s) {
      Vec a = x, b = x;
      a[i] += s;
      b[i] -= s;
      return (f(a) - 2.0 * f0 + f(b)) / (s * s);
    };
    H(i, i) = (4.0 * d2(h) - d2(2.0 * h)) / 3.0;
    for (Eigen::Index j = 0; j < i; ++j) {
      auto dm = [&](double s) {
        auto at = [&](double si, double sj) {
          Vec z = x;
          z[i] += si;
          z[j] += sj;
          return f(z);
        };
        return (at(s, s) - at(s, -s) - at(-s, s) + at(-s, -s)) / (4.0 * s * s);
      };
      H(i, j) = H(j, i) = (4.0 * dm(h) - dm(2.0 * h)) / 3.0;
    }
  }
  return H;
}

/// Jacobian of a vector-valued map; column j holds d f / d x^j.
template <class Fn>
Mat jacobian(Fn&& f, const Vec& x, double h) {
  const auto n = x.size();
  Mat J;
  for (Eigen::Index j = 0; j < n; ++j) {
    auto shifted = [&](double s) {
      Vec z = x;
      z[j] += s;
      return Vec(f(z));
    };
    const Vec d1 = (shifted(h) - shifted(-h)) / (2.0 * h);
    const Vec d2 = (shifted(2.0 * h) - shifted(-2.0 * h)) / (4.0 * h);
    const Vec col = (4.0 * d1 - d2) / 3.0;
    if (j == 0) J.resize(col.size(), n);
    J.col(j) = col;
  }
  return J;
}

}  // namespace finsler::numdiff
