#include "finsler/fields.hpp"

#include <cmath>

namespace finsler::fields {

ScalarField coordinate(int dimension, int i) {
  ScalarField f;
  f.name = "x" + std::to_string(i + 1);
  f.value = [i](const Vec& x) { return x[i]; };
  f.differential = [dimension, i](const Vec&) {
    Vec d = Vec::Zero(dimension);
    d[i] = 1.0;
    return d;
  };
  f.hessian = [dimension](const Vec&) { return Mat::Zero(dimension, dimension); };
  return f;
}

ScalarField half_square(int dimension) {
  ScalarField f;
  f.name = "half-square";
  f.value = [](const Vec& x) { return 0.5 * x.squaredNorm(); };
  f.differential = [](const Vec& x) { return x; };
  f.hessian = [dimension](const Vec&) { return Mat::Identity(dimension, dimension); };
  return f;
}

ScalarField euclidean_radius(const Vec& center) {
  ScalarField f;
  f.name = "euclidean-radius";
  f.value = [center](const Vec& x) { return (x - center).norm(); };
  f.differential = [center](const Vec& x) {
    const Vec d = x - center;
    return Vec(d / d.norm());
  };
  f.hessian = [center](const Vec& x) {
    const Vec d = x - center;
    const double r = d.norm();
    const auto n = d.size();
    return Mat((Mat::Identity(n, n) - d * d.transpose() / (r * r)) / r);
  };
  return f;
}

ScalarField linear(const Vec& a, double c) {
  ScalarField f;
  f.name = "linear";
  f.value = [a, c](const Vec& x) { return a.dot(x) + c; };
  f.differential = [a](const Vec&) { return a; };
  const auto n = a.size();
  f.hessian = [n](const Vec&) { return Mat::Zero(n, n); };
  return f;
}

ScalarField negative_log_height(int dimension) {
  ScalarField f;
  f.name = "negative-log-height";
  const int last = dimension - 1;
  f.value = [last](const Vec& x) { return -std::log(x[last]); };
  f.differential = [dimension, last](const Vec& x) {
    Vec d = Vec::Zero(dimension);
    d[last] = -1.0 / x[last];
    return d;
  };
  f.hessian = [dimension, last](const Vec& x) {
    Mat h = Mat::Zero(dimension, dimension);
    h(last, last) = 1.0 / (x[last] * x[last]);
    return h;
  };
  return f;
}

ScalarField distance_from(const FinslerStructure& F, const Vec& c, const DistanceOptions& options) {
  ScalarField f;
  f.name = "distance-from";
  f.value = [F, c, options](const Vec& x) { return distance(F, c, x, options).value; };
  f.differential = [F, c, options](const Vec& x) {
    const DistanceResult d = distance(F, c, x, options);
    if (d.final_velocity.size() == 0) throw GeometricError("distance field is not differentiable at its centre");
    return F.model().legendre(x, d.final_velocity);
  };
  return f;
}

ScalarField distance_to(const FinslerStructure& F, const Vec& q, const DistanceOptions& options) {
  ScalarField f;
  f.name = "distance-to";
  f.value = [F, q, options](const Vec& x) { return distance(F, x, q, options).value; };
  f.differential = [F, q, options](const Vec& x) {
    const DistanceResult d = distance(F, x, q, options);
    if (d.initial_velocity.size() == 0) throw GeometricError("distance field is not differentiable at its centre");
    return Vec(-F.model().legendre(x, d.initial_velocity));
  };
  return f;
}

}  // namespace finsler::fields
