#pragma once

#include "finsler/geodesic.hpp"
#include "finsler/grid.hpp"
#include "finsler/measure.hpp"

#include <string>
#include <vector>

namespace finsler {

struct LaplacianReport {
  Vec point;
  double value = 0.0;
  Vec differential;
  Vec gradient;
  bool zero_differential = false;
  std::string differential_source;  // "supplied" or "finite-difference"
  std::string hessian_source;       // "supplied", "differential-difference" or "value-difference"
  std::string metric_source;        // derivative provider of the structure
  std::string density_source;       // provenance of the volume form
  /// |D(h) - D(2h)| of the divergence stencil.
  double stencil_gap = 0.0;
};

/// Shen's Laplacian div_sigma(grad f) at x:
///   sum_k d_k V^k + V . d log sigma,   V(z) = J*(z, df(z)),
/// where d_k V^k is a central difference of V along e_k with df linearized by
/// the Hessian of f at x. Zero when |df(x)|_inf < kZeroDifferential.
LaplacianReport shen_laplacian(const FinslerStructure& F, const VolumeForm& mu, const ScalarField& f, const Vec& x);

/// The polynomial bump prod_i (1 - s_i^2)^3 on the j-th nested sub-box of
/// `domain` (j = 0..4; sub-box j keeps the fraction 1 - 0.18 j of each side).
struct Bump {
  Box support;
  double value(const Vec& x) const;
  Vec differential(const Vec& x) const;
};

Bump nested_bump(const Box& domain, int j);

struct WeakResidualReport {
  std::vector<double> residuals;  // one per bump
  double max_residual = 0.0;
  int nodes_per_axis = 0;
};

/// max over the nested bumps of | h * int phi dmu + int dphi(grad u) dmu |,
/// tensor Gauss-Legendre on each bump support.
WeakResidualReport weak_laplacian_residual(const FinslerStructure& F, const VolumeForm& mu, const ScalarField& u,
                                           double h, const Box& domain, int nodes_per_axis = 20);

/// -int dphi(grad u) dmu, the weak pairing <Delta u, phi>.
double weak_laplacian_pairing(const FinslerStructure& F, const VolumeForm& mu, const ScalarField& u,
                              const Bump& phi, int nodes_per_axis = 20);

/// | int phi Delta u dmu + int dphi(grad u) dmu |, the strong Laplacian
/// integrated against phi compared with the weak pairing.
double weak_strong_gap(const FinslerStructure& F, const VolumeForm& mu, const ScalarField& u, const Bump& phi,
                       int nodes_per_axis = 12);

/// int phi dmu.
double bump_mass(const VolumeForm& mu, const Bump& phi, int nodes_per_axis = 20);

struct MeanCurvatureReport {
  double laplacian = 0.0;  // Delta r at x
  double flow = 0.0;       // d/dt log(sigma * Jacobian) of the flow of grad r
  double gap = 0.0;
};

/// Mean curvature of the level set of r through x, computed as Delta r and as
/// the logarithmic volume derivative along the flow of grad r.
MeanCurvatureReport level_set_mean_curvature(const FinslerStructure& F, const VolumeForm& mu, const ScalarField& r,
                                             const Vec& x);

struct HarmonicityReport {
  Vec base;
  std::vector<double> radii;
  std::vector<Vec> directions;  // on the indicatrix at base
  /// density[i][k]: normalized polar density at radii[i], directions[k]
  std::vector<std::vector<double>> density;
  /// raw[i][k]: sigma_p(r, y) / sqrt(det of g restricted to the indicatrix)
  std::vector<std::vector<double>> raw;
  double radial_deviation = 0.0;
  double raw_radial_deviation = 0.0;
  double threshold = 1e-4;
  bool harmonic = false;
  std::string notes;
};

inline constexpr double kHarmonicThreshold = 1e-4;

/// Tabulates the polar volume density around p through geodesic polar
/// coordinates, with the angular Jacobian from central differences (1e-4) of
/// the exponential map. The normalized density divides by its flat value
/// sigma(p) r^(n-1) |det[u, du]|; radial deviation is max over r of
/// (max_u - min_u) / mean_u.
HarmonicityReport harmonicity_check(const FinslerStructure& F, const VolumeForm& mu, const Vec& p,
                                    const std::vector<double>& radii, int directions,
                                    double threshold = kHarmonicThreshold);

struct HorosphereLimitReport {
  std::vector<double> t;
  std::vector<double> curvature;  // mean curvature at p of the sphere of radius t
  double limit = 0.0;
  double error_bar = 0.0;
  std::string notes;
};

/// Mean curvature at p of the geodesic spheres of radius t centred at
/// exp(p, -v, t), extrapolated to t = infinity with the model Pi(t) = Pi + c / t.
HorosphereLimitReport horosphere_mean_curvature_limit(const FinslerStructure& F, const VolumeForm& mu, const Vec& p,
                                                      const Vec& v, const std::vector<double>& t_list);

}  // namespace finsler
