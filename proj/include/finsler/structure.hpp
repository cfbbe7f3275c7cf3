#pragma once

#include "finsler/chart.hpp"
#include "finsler/rng.hpp"
#include "finsler/types.hpp"

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace finsler {

enum class Family { euclidean, riemannian, minkowski, randers, custom };

std::string_view to_string(Family family);
Family family_from_string(std::string_view name);

enum class DerivativeProvider { exact, finite_difference };

std::string_view to_string(DerivativeProvider provider);

/// Symmetric positive-definite matrix field a_ij(x) with exact first partials.
class MatrixField {
 public:
  virtual ~MatrixField() = default;
  virtual Mat value(const Vec& x) const = 0;
  /// d a / d x^k
  virtual Mat partial(const Vec& x, int k) const = 0;
  virtual bool constant() const { return false; }
  virtual std::string describe() const = 0;
};

/// One-form field b_i(x) with exact first partials.
class OneFormField {
 public:
  virtual ~OneFormField() = default;
  virtual Vec value(const Vec& x) const = 0;
  virtual Vec partial(const Vec& x, int k) const = 0;
  virtual bool constant() const { return false; }
  virtual std::string describe() const = 0;
};

/// Named matrix-field presets: "identity", "constant" (n diagonal or n*n
/// row-major entries), "hyperbolic" (a = I / x_n^2, upper half-space),
/// "perturbed" (a = (1 + amp * exp(-|x - c|^2)) I; params: amp, c...).
std::shared_ptr<const MatrixField> make_matrix_preset(std::string_view name, int dimension,
                                                      const std::vector<double>& params);

/// One-form presets: "constant" (components), "swirl" (amp * (-x2, x1, 0...) / (1 + |x|^2)).
std::shared_ptr<const OneFormField> make_one_form_preset(std::string_view name, int dimension,
                                                         const std::vector<double>& params);

/// Norm family on a chart. Implementations are immutable.
///
/// The default members compute everything from norm() with finite
/// differences; built-in families override them with exact formulas.
class NormModel {
 public:
  virtual ~NormModel() = default;

  virtual double norm(const Vec& x, const Vec& y) const = 0;
  /// J(x, y) = g_ij(x, y) y^i = (1/2) d F^2 / d y.
  virtual Vec legendre(const Vec& x, const Vec& y) const;
  /// g_ij(x, y), y nonzero.
  virtual Mat fundamental(const Vec& x, const Vec& y) const;
  /// Solves J(x, y) = a for y. a nonzero.
  virtual Vec inverse_legendre(const Vec& x, const Vec& a) const;
  virtual double dual_norm(const Vec& x, const Vec& a) const;
  /// d/dx of L = F^2 / 2.
  virtual Vec lagrangian_x(const Vec& x, const Vec& y) const;
  /// Entry (l, k) is d J_l / d x^k.
  virtual Mat legendre_x(const Vec& x, const Vec& y) const;
  /// Spray coefficients G^i; geodesics solve x'' = -2 G(x, x').
  virtual Vec spray(const Vec& x, const Vec& y) const;

  virtual bool point_independent() const = 0;
  virtual DerivativeProvider provider() const = 0;
  /// Matrix a(x) when F(x, y) = sqrt(y^T a(x) y).
  virtual std::optional<Mat> quadratic_matrix(const Vec& /*x*/) const { return std::nullopt; }
  virtual std::shared_ptr<const NormModel> reversed(std::shared_ptr<const NormModel> self) const;
  virtual std::string describe() const = 0;
};

/// Thread-safe immutable handle to a Finsler structure on a single chart.
class FinslerStructure {
 public:
  FinslerStructure(ManifoldChart chart, Family family, std::shared_ptr<const NormModel> model, bool reversible,
                   std::string id);

  static FinslerStructure euclidean(int dimension);
  static FinslerStructure riemannian(ManifoldChart chart, std::shared_ptr<const MatrixField> metric,
                                     std::string id = {});
  /// Hyperbolic upper half-space with a = I / x_n^2.
  static FinslerStructure hyperbolic(int dimension);
  /// Point-independent norm sqrt(y^T a y) + b . y.
  static FinslerStructure minkowski(const Mat& a, const Vec& b);
  static FinslerStructure randers(ManifoldChart chart, std::shared_ptr<const MatrixField> alpha,
                                  std::shared_ptr<const OneFormField> beta, std::string id = {});
  /// Euclidean alpha with constant beta on R^n.
  static FinslerStructure randers_constant(const Vec& beta);
  static FinslerStructure custom(ManifoldChart chart, std::function<double(const Vec&, const Vec&)> norm,
                                 bool point_independent, bool reversible, std::string id);
  /// Custom presets: "quartic" ((sum y_i^4)^(1/4)), "swirl-randers" (|y| + amp (-x2 y1 + x1 y2) / (1 + |x|^2)).
  static FinslerStructure custom_preset(std::string_view name, int dimension, const std::vector<double>& params);

  const ManifoldChart& chart() const { return chart_; }
  int dimension() const { return chart_.dimension(); }
  Family family() const { return family_; }
  bool reversible() const { return reversible_; }
  const std::string& id() const { return id_; }
  const NormModel& model() const { return *model_; }
  std::shared_ptr<const NormModel> model_ptr() const { return model_; }
  DerivativeProvider provider() const { return model_->provider(); }
  bool point_independent() const { return model_->point_independent(); }

  /// F(x, y). Throws DomainError when x is outside the chart.
  double norm(const Vec& x, const Vec& y) const;

 private:
  ManifoldChart chart_;
  Family family_;
  std::shared_ptr<const NormModel> model_;
  bool reversible_;
  std::string id_;
};

struct FundamentalTensor {
  TangentVector at;
  Mat matrix;
  Mat inverse;
  DerivativeProvider provider;
};

/// Zero-differential threshold on the sup norm.
inline constexpr double kZeroDifferential = 1e-10;

double evaluate_norm(const FinslerStructure& F, const TangentVector& v);
FundamentalTensor fundamental_tensor(const FinslerStructure& F, const TangentVector& v);
double dual_norm(const FinslerStructure& F, const Covector& a);
Covector legendre(const FinslerStructure& F, const TangentVector& v);
TangentVector inverse_legendre(const FinslerStructure& F, const Covector& a);
/// Dual metric g*_ij(x, a) = g^ij(x, J*(a)).
Mat dual_fundamental(const FinslerStructure& F, const Covector& a);
FinslerStructure reverse_structure(const FinslerStructure& F);

/// Scalar field with optional exact first and second derivatives.
struct ScalarField {
  std::function<double(const Vec&)> value;
  std::function<Vec(const Vec&)> differential;  // optional
  std::function<Mat(const Vec&)> hessian;       // optional
  /// Finite-difference step for derivatives that are not supplied.
  double step = 1e-3;
  std::string name;

  Vec differential_at(const Vec& x) const;
  Mat hessian_at(const Vec& x) const;
};

/// Finsler gradient J*(x, df(x)); zero when |df(x)|_inf < kZeroDifferential.
TangentVector gradient(const ScalarField& f, const FinslerStructure& F, const Vec& x);

/// Result of sampled invariant screening of a structure.
struct ScreeningReport {
  int samples = 0;
  double worst_homogeneity = 0.0;
  double min_norm_on_sphere = 0.0;
  double min_eigenvalue = 0.0;
  double max_beta_norm = 0.0;  // randers only
  bool passed = true;
  std::string message;
};

/// Checks homogeneity, positivity and positive definiteness at sampled
/// points of the chart (bounded window around the origin).
ScreeningReport screen_structure(const FinslerStructure& F, int samples, unsigned long long seed);

/// Deterministic sample point in the chart: uniform on [-window, window]^n,
/// with half-bounded axes shifted into the domain.
Vec sample_chart_point(const ManifoldChart& chart, Rng& rng, double window = 2.0);

}  // namespace finsler
