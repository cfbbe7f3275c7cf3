#pragma once

#include "finsler/structure.hpp"

#include <functional>
#include <memory>
#include <string_view>

namespace finsler {

enum class VolumeKind { busemann_hausdorff, holmes_thompson };

std::string_view to_string(VolumeKind kind);
VolumeKind volume_kind_from_string(std::string_view name);

/// Volume of the Euclidean unit ball in R^n.
double unit_ball_volume(int n);

/// Integral of f over the Euclidean unit sphere S^{n-1}, n in 2..4, with a
/// tensor rule of the given resolution (trapezoid in the periodic angle,
/// Gauss-Legendre in the others).
double sphere_integral(int n, int resolution, const std::function<double(const Vec&)>& f);

/// Density sigma(x) of a Busemann-Hausdorff or Holmes-Thompson volume form.
///
///   BH: sigma = vol(B^n) / vol{y : F(x, y) < 1}
///   HT: sigma = (1 / vol(B^n)) * integral over {F(x, y) < 1} of det g(x, y) dy
///
/// Quadratic norms use sqrt(det a) for both; other norms integrate over the
/// Euclidean sphere by polar coordinates with resolution doubling.
class VolumeForm {
 public:
  VolumeForm(FinslerStructure F, VolumeKind kind, double rel_tolerance = 1e-12);

  VolumeKind kind() const { return kind_; }
  const FinslerStructure& structure() const { return F_; }
  /// "closed-form" or "quadrature".
  std::string_view provenance() const { return closed_form_ ? "closed-form" : "quadrature"; }

  double density(const Vec& x) const;
  /// d log sigma / dx.
  Vec log_density_gradient(const Vec& x) const;

 private:
  double quadrature_density(const Vec& x) const;

  FinslerStructure F_;
  VolumeKind kind_;
  double rel_tolerance_;
  bool closed_form_;
  bool constant_;
  double constant_value_ = 0.0;
};

}  // namespace finsler
