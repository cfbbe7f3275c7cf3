#pragma once

// Concrete norm models behind FinslerStructure. Internal to the core library.

#include "finsler/structure.hpp"

namespace finsler::detail {

/// F = sqrt(y^T a(x) y).
class QuadraticModel final : public NormModel {
 public:
  explicit QuadraticModel(std::shared_ptr<const MatrixField> metric) : metric_(std::move(metric)) {}

  double norm(const Vec& x, const Vec& y) const override;
  Vec legendre(const Vec& x, const Vec& y) const override;
  Mat fundamental(const Vec& x, const Vec& y) const override;
  Vec inverse_legendre(const Vec& x, const Vec& a) const override;
  double dual_norm(const Vec& x, const Vec& a) const override;
  Vec lagrangian_x(const Vec& x, const Vec& y) const override;
  Mat legendre_x(const Vec& x, const Vec& y) const override;
  Vec spray(const Vec& x, const Vec& y) const override;
  bool point_independent() const override { return metric_->constant(); }
  DerivativeProvider provider() const override { return DerivativeProvider::exact; }
  std::optional<Mat> quadratic_matrix(const Vec& x) const override { return metric_->value(x); }
  std::shared_ptr<const NormModel> reversed(std::shared_ptr<const NormModel> self) const override { return self; }
  std::string describe() const override { return "quadratic(" + metric_->describe() + ")"; }

  const MatrixField& metric() const { return *metric_; }

 private:
  std::shared_ptr<const MatrixField> metric_;
};

/// F = sqrt(y^T a(x) y) + b(x) . y with |b|_a < 1.
class RandersModel final : public NormModel {
 public:
  RandersModel(std::shared_ptr<const MatrixField> alpha, std::shared_ptr<const OneFormField> beta)
      : alpha_(std::move(alpha)), beta_(std::move(beta)) {}

  double norm(const Vec& x, const Vec& y) const override;
  Vec legendre(const Vec& x, const Vec& y) const override;
  Mat fundamental(const Vec& x, const Vec& y) const override;
  Vec inverse_legendre(const Vec& x, const Vec& a) const override;
  double dual_norm(const Vec& x, const Vec& a) const override;
  Vec lagrangian_x(const Vec& x, const Vec& y) const override;
  Mat legendre_x(const Vec& x, const Vec& y) const override;
  bool point_independent() const override { return alpha_->constant() && beta_->constant(); }
  DerivativeProvider provider() const override { return DerivativeProvider::exact; }
  std::shared_ptr<const NormModel> reversed(std::shared_ptr<const NormModel> self) const override;
  std::string describe() const override {
    return "randers(" + alpha_->describe() + ", " + beta_->describe() + ")";
  }

  /// |b(x)|_a = sqrt(b^T a^-1 b)
  double one_form_norm(const Vec& x) const;
  const OneFormField& beta() const { return *beta_; }
  const MatrixField& alpha() const { return *alpha_; }

 private:
  std::shared_ptr<const MatrixField> alpha_;
  std::shared_ptr<const OneFormField> beta_;
};

/// User-supplied norm evaluator; every derivative is a finite difference.
class CustomModel final : public NormModel {
 public:
  CustomModel(std::function<double(const Vec&, const Vec&)> fn, bool point_independent, std::string name)
      : fn_(std::move(fn)), point_independent_(point_independent), name_(std::move(name)) {}

  double norm(const Vec& x, const Vec& y) const override { return fn_(x, y); }
  Vec lagrangian_x(const Vec& x, const Vec& y) const override;
  Mat legendre_x(const Vec& x, const Vec& y) const override;
  bool point_independent() const override { return point_independent_; }
  DerivativeProvider provider() const override { return DerivativeProvider::finite_difference; }
  std::string describe() const override { return "custom(" + name_ + ")"; }

 private:
  std::function<double(const Vec&, const Vec&)> fn_;
  bool point_independent_;
  std::string name_;
};

/// F(x, -y) on top of another model.
class ReversedModel final : public NormModel {
 public:
  explicit ReversedModel(std::shared_ptr<const NormModel> base) : base_(std::move(base)) {}

  double norm(const Vec& x, const Vec& y) const override { return base_->norm(x, -y); }
  Vec legendre(const Vec& x, const Vec& y) const override { return -base_->legendre(x, -y); }
  Mat fundamental(const Vec& x, const Vec& y) const override { return base_->fundamental(x, -y); }
  Vec inverse_legendre(const Vec& x, const Vec& a) const override { return -base_->inverse_legendre(x, -a); }
  double dual_norm(const Vec& x, const Vec& a) const override { return base_->dual_norm(x, -a); }
  Vec lagrangian_x(const Vec& x, const Vec& y) const override { return base_->lagrangian_x(x, -y); }
  Mat legendre_x(const Vec& x, const Vec& y) const override { return -base_->legendre_x(x, -y); }
  Vec spray(const Vec& x, const Vec& y) const override { return base_->spray(x, -y); }
  bool point_independent() const override { return base_->point_independent(); }
  DerivativeProvider provider() const override { return base_->provider(); }
  std::optional<Mat> quadratic_matrix(const Vec& x) const override { return base_->quadratic_matrix(x); }
  std::shared_ptr<const NormModel> reversed(std::shared_ptr<const NormModel>) const override { return base_; }
  std::string describe() const override { return "reverse(" + base_->describe() + ")"; }

 private:
  std::shared_ptr<const NormModel> base_;
};

/// Damped Newton solve of J(x, y) = a from the initial guess y0. Returns
/// nullopt when the residual does not reach tolerance within the budget.
std::optional<Vec> newton_inverse_legendre(const NormModel& model, const Vec& x, const Vec& a, Vec y0,
                                           double* residual_out = nullptr);

}  // namespace finsler::detail
