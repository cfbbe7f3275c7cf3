#include "finsler/numdiff.hpp"
#include "finsler/structure.hpp"
#include "models.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace finsler {

double evaluate_norm(const FinslerStructure& F, const TangentVector& v) {
  return F.norm(v.base, v.components);
}

FundamentalTensor fundamental_tensor(const FinslerStructure& F, const TangentVector& v) {
  F.chart().require_contains(v.base, "base point");
  if (v.components.cwiseAbs().maxCoeff() == 0.0)
    throw DegenerateDirectionError("fundamental tensor requested at the zero vector");
  FundamentalTensor out;
  out.at = v;
  out.matrix = F.model().fundamental(v.base, v.components);
  out.provider = F.provider();
  Eigen::SelfAdjointEigenSolver<Mat> eig(out.matrix);
  if (!(eig.eigenvalues().minCoeff() > 0.0))
    throw MetricError("fundamental tensor is not positive definite (smallest eigenvalue " +
                      std::to_string(eig.eigenvalues().minCoeff()) + ")");
  out.inverse = out.matrix.ldlt().solve(Mat::Identity(out.matrix.rows(), out.matrix.cols()));
  return out;
}

double dual_norm(const FinslerStructure& F, const Covector& a) {
  F.chart().require_contains(a.base, "base point");
  return F.model().dual_norm(a.base, a.components);
}

Covector legendre(const FinslerStructure& F, const TangentVector& v) {
  F.chart().require_contains(v.base, "base point");
  if (v.components.cwiseAbs().maxCoeff() == 0.0) return {v.base, Vec::Zero(v.components.size())};
  return {v.base, F.model().legendre(v.base, v.components)};
}

TangentVector inverse_legendre(const FinslerStructure& F, const Covector& a) {
  F.chart().require_contains(a.base, "base point");
  if (a.components.cwiseAbs().maxCoeff() == 0.0) return {a.base, Vec::Zero(a.components.size())};
  return {a.base, F.model().inverse_legendre(a.base, a.components)};
}

Mat dual_fundamental(const FinslerStructure& F, const Covector& a) {
  const TangentVector y = inverse_legendre(F, a);
  return fundamental_tensor(F, y).inverse;
}

FinslerStructure reverse_structure(const FinslerStructure& F) {
  auto model = F.model().reversed(F.model_ptr());
  std::string id = F.reversible() ? F.id() : "reverse(" + F.id() + ")";
  const std::string prefix = "reverse(";
  if (!F.reversible() && F.id().rfind(prefix, 0) == 0 && F.id().back() == ')')
    id = F.id().substr(prefix.size(), F.id().size() - prefix.size() - 1);
  return FinslerStructure(F.chart(), F.family(), model, F.reversible(), id);
}

Vec ScalarField::differential_at(const Vec& x) const {
  if (differential) return differential(x);
  return numdiff::gradient(value, x, step);
}

Mat ScalarField::hessian_at(const Vec& x) const {
  if (hessian) return hessian(x);
  if (differential) {
    Mat h = numdiff::jacobian(differential, x, step);
    return 0.5 * (h + h.transpose());
  }
  return numdiff::hessian(value, x, step);
}

TangentVector gradient(const ScalarField& f, const FinslerStructure& F, const Vec& x) {
  F.chart().require_contains(x, "gradient point");
  const Vec df = f.differential_at(x);
  if (df.cwiseAbs().maxCoeff() < kZeroDifferential) return {x, Vec::Zero(x.size())};
  return {x, F.model().inverse_legendre(x, df)};
}

ScreeningReport screen_structure(const FinslerStructure& F, int samples, unsigned long long seed) {
  ScreeningReport r;
  r.samples = samples;
  r.min_norm_on_sphere = std::numeric_limits<double>::infinity();
  r.min_eigenvalue = std::numeric_limits<double>::infinity();
  const int n = F.dimension();
  const auto* randers = dynamic_cast<const detail::RandersModel*>(&F.model());
  Rng rng(seed);
  for (int k = 0; k < samples; ++k) {
    const Vec x = sample_chart_point(F.chart(), rng);
    const Vec y = rng.direction(n);
    const double lam = rng.uniform(0.1, 10.0);
    const double f = F.model().norm(x, y);
    const double fl = F.model().norm(x, lam * y);
    if (!std::isfinite(f) || !std::isfinite(fl)) {
      r.passed = false;
      r.message = "norm is not finite at a sampled point";
      continue;
    }
    r.worst_homogeneity = std::max(r.worst_homogeneity, std::abs(fl - lam * f) / (lam * std::max(f, 1e-300)));
    r.min_norm_on_sphere = std::min(r.min_norm_on_sphere, f);
    try {
      const Mat g = F.model().fundamental(x, y);
      Eigen::SelfAdjointEigenSolver<Mat> eig(g);
      r.min_eigenvalue = std::min(r.min_eigenvalue, eig.eigenvalues().minCoeff());
    } catch (const FinslerError& e) {
      r.passed = false;
      r.message = e.what();
    }
    if (randers) r.max_beta_norm = std::max(r.max_beta_norm, randers->one_form_norm(x));
  }
  if (r.worst_homogeneity > 1e-9) {
    r.passed = false;
    r.message = "norm is not positively homogeneous";
  }
  if (!(r.min_norm_on_sphere > 0.0)) {
    r.passed = false;
    r.message = "norm is not positive on nonzero vectors";
  }
  if (!(r.min_eigenvalue > 0.0)) {
    r.passed = false;
    r.message = "fundamental tensor is not positive definite";
  }
  if (randers && !(r.max_beta_norm < 1.0)) {
    r.passed = false;
    r.message = "Randers one-form reaches alpha-norm 1";
  }
  return r;
}

}  // namespace finsler
