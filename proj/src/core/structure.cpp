#include "finsler/structure.hpp"

#include "finsler/numdiff.hpp"
#include "models.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

namespace finsler {

namespace {

std::string join(const std::vector<double>& values) {
  std::ostringstream os;
  os.precision(17);
  for (std::size_t i = 0; i < values.size(); ++i) os << (i ? "," : "") << values[i];
  return os.str();
}

class ConstantMatrix final : public MatrixField {
 public:
  explicit ConstantMatrix(Mat a) : a_(std::move(a)) {}
  Mat value(const Vec&) const override { return a_; }
  Mat partial(const Vec&, int) const override { return Mat::Zero(a_.rows(), a_.cols()); }
  bool constant() const override { return true; }
  std::string describe() const override {
    std::vector<double> v(a_.data(), a_.data() + a_.size());
    return "constant[" + join(v) + "]";
  }

 private:
  Mat a_;
};

// a = I / x_n^2 on the upper half-space.
class HyperbolicMatrix final : public MatrixField {
 public:
  explicit HyperbolicMatrix(int n) : n_(n) {}
  Mat value(const Vec& x) const override {
    const double h = x[n_ - 1];
    return Mat::Identity(n_, n_) / (h * h);
  }
  Mat partial(const Vec& x, int k) const override {
    if (k != n_ - 1) return Mat::Zero(n_, n_);
    const double h = x[n_ - 1];
    return Mat::Identity(n_, n_) * (-2.0 / (h * h * h));
  }
  std::string describe() const override { return "hyperbolic"; }

 private:
  int n_;
};

// a = (1 + amp exp(-|x - c|^2)) I. Not rotationally symmetric about the origin
// unless c = 0.
class PerturbedMatrix final : public MatrixField {
 public:
  PerturbedMatrix(int n, double amp, Vec center) : n_(n), amp_(amp), center_(std::move(center)) {}
  Mat value(const Vec& x) const override { return Mat::Identity(n_, n_) * (1.0 + bump(x)); }
  Mat partial(const Vec& x, int k) const override {
    return Mat::Identity(n_, n_) * (bump(x) * (-2.0 * (x[k] - center_[k])));
  }
  std::string describe() const override {
    std::vector<double> c(center_.data(), center_.data() + center_.size());
    return "perturbed[" + join({amp_}) + ";" + join(c) + "]";
  }

 private:
  double bump(const Vec& x) const { return amp_ * std::exp(-(x - center_).squaredNorm()); }
  int n_;
  double amp_;
  Vec center_;
};

class ConstantOneForm final : public OneFormField {
 public:
  explicit ConstantOneForm(Vec b) : b_(std::move(b)) {}
  Vec value(const Vec&) const override { return b_; }
  Vec partial(const Vec&, int) const override { return Vec::Zero(b_.size()); }
  bool constant() const override { return true; }
  std::string describe() const override {
    std::vector<double> v(b_.data(), b_.data() + b_.size());
    return "constant[" + join(v) + "]";
  }

 private:
  Vec b_;
};

// amp * (-x2, x1, 0, ...) / (1 + |x|^2); Euclidean norm at most amp / 2.
class SwirlOneForm final : public OneFormField {
 public:
  SwirlOneForm(int n, double amp) : n_(n), amp_(amp) {}
  Vec value(const Vec& x) const override {
    Vec v = Vec::Zero(n_);
    v[0] = -x[1];
    v[1] = x[0];
    return v * (amp_ / (1.0 + x.squaredNorm()));
  }
  Vec partial(const Vec& x, int k) const override {
    const double s = 1.0 + x.squaredNorm();
    Vec v = Vec::Zero(n_);
    v[0] = -x[1];
    v[1] = x[0];
    Vec dv = Vec::Zero(n_);
    if (k == 0) dv[1] = 1.0;
    if (k == 1) dv[0] = -1.0;
    return amp_ * (dv / s - v * (2.0 * x[k] / (s * s)));
  }
  std::string describe() const override { return "swirl[" + join({amp_}) + "]"; }

 private:
  int n_;
  double amp_;
};

class NegatedOneForm final : public OneFormField {
 public:
  explicit NegatedOneForm(std::shared_ptr<const OneFormField> base) : base_(std::move(base)) {}
  Vec value(const Vec& x) const override { return -base_->value(x); }
  Vec partial(const Vec& x, int k) const override { return -base_->partial(x, k); }
  bool constant() const override { return base_->constant(); }
  std::string describe() const override { return "neg(" + base_->describe() + ")"; }
  const std::shared_ptr<const OneFormField>& base() const { return base_; }

 private:
  std::shared_ptr<const OneFormField> base_;
};

Mat solve_inverse(const Mat& g) {
  return g.ldlt().solve(Mat::Identity(g.rows(), g.cols()));
}

}  // namespace

std::string_view to_string(Family family) {
  switch (family) {
    case Family::euclidean: return "euclidean";
    case Family::riemannian: return "riemannian";
    case Family::minkowski: return "minkowski";
    case Family::randers: return "randers";
    case Family::custom: return "custom";
  }
  return "unknown";
}

Family family_from_string(std::string_view name) {
  if (name == "euclidean") return Family::euclidean;
  if (name == "riemannian") return Family::riemannian;
  if (name == "minkowski") return Family::minkowski;
  if (name == "randers") return Family::randers;
  if (name == "custom") return Family::custom;
  throw FinslerError(ErrorCode::invalid_argument, "unknown family '" + std::string(name) + "'");
}

std::string_view to_string(DerivativeProvider provider) {
  return provider == DerivativeProvider::exact ? "exact" : "finite-difference";
}

std::shared_ptr<const MatrixField> make_matrix_preset(std::string_view name, int n,
                                                      const std::vector<double>& params) {
  if (name == "identity" || name == "euclidean") return std::make_shared<ConstantMatrix>(Mat::Identity(n, n));
  if (name == "constant") {
    Mat a(n, n);
    if (static_cast<int>(params.size()) == n) {
      a.setZero();
      for (int i = 0; i < n; ++i) a(i, i) = params[i];
    } else if (static_cast<int>(params.size()) == n * n) {
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) a(i, j) = params[i * n + j];
    } else {
      throw FinslerError(ErrorCode::invalid_argument, "constant metric needs n or n*n entries");
    }
    if ((a - a.transpose()).cwiseAbs().maxCoeff() > 1e-12)
      throw MetricError("constant metric matrix is not symmetric");
    Eigen::SelfAdjointEigenSolver<Mat> eig(a);
    if (eig.eigenvalues().minCoeff() <= 0.0) throw MetricError("constant metric matrix is not positive definite");
    return std::make_shared<ConstantMatrix>(a);
  }
  if (name == "hyperbolic") return std::make_shared<HyperbolicMatrix>(n);
  if (name == "perturbed") {
    const double amp = params.empty() ? 0.5 : params[0];
    Vec c = Vec::Zero(n);
    c[0] = 1.0;
    if (params.size() > 1) {
      if (static_cast<int>(params.size()) != n + 1)
        throw FinslerError(ErrorCode::invalid_argument, "perturbed metric takes amp followed by n center entries");
      for (int i = 0; i < n; ++i) c[i] = params[i + 1];
    }
    if (amp <= -1.0) throw MetricError("perturbed metric amplitude must exceed -1");
    return std::make_shared<PerturbedMatrix>(n, amp, c);
  }
  throw FinslerError(ErrorCode::invalid_argument, "unknown metric preset '" + std::string(name) + "'");
}

std::shared_ptr<const OneFormField> make_one_form_preset(std::string_view name, int n,
                                                         const std::vector<double>& params) {
  if (name == "constant") {
    if (static_cast<int>(params.size()) != n)
      throw FinslerError(ErrorCode::invalid_argument, "constant one-form needs n components");
    Vec b(n);
    for (int i = 0; i < n; ++i) b[i] = params[i];
    return std::make_shared<ConstantOneForm>(b);
  }
  if (name == "swirl") return std::make_shared<SwirlOneForm>(n, params.empty() ? 0.5 : params[0]);
  throw FinslerError(ErrorCode::invalid_argument, "unknown one-form preset '" + std::string(name) + "'");
}

// ---------------------------------------------------------------------------
// NormModel defaults: finite differences of the norm evaluator.

Vec NormModel::legendre(const Vec& x, const Vec& y) const {
  const double r = y.norm();
  if (r == 0.0) return Vec::Zero(y.size());
  const Vec u = y / r;
  auto half_sq = [&](const Vec& z) {
    const double f = norm(x, z);
    return 0.5 * f * f;
  };
  return r * numdiff::gradient(half_sq, u, numdiff::first_order_step());
}

Mat NormModel::fundamental(const Vec& x, const Vec& y) const {
  const double r = y.norm();
  if (r == 0.0) throw DegenerateDirectionError("fundamental tensor at the zero vector");
  const Vec u = y / r;
  auto half_sq = [&](const Vec& z) {
    const double f = norm(x, z);
    return 0.5 * f * f;
  };
  Mat g = numdiff::hessian(half_sq, u, numdiff::second_order_step());
  return 0.5 * (g + g.transpose());
}

namespace detail {

std::optional<Vec> newton_inverse_legendre(const NormModel& model, const Vec& x, const Vec& a, Vec y,
                                           double* residual_out) {
  constexpr int kMaxIterations = 100;
  const double scale = std::max(1.0, a.norm());
  const double tol = 1e-10 * scale;
  Vec r = model.legendre(x, y) - a;
  double res = r.norm();
  int polish = 0;
  for (int it = 0; it < kMaxIterations && std::isfinite(res); ++it) {
    if (res <= tol) {
      // a couple of extra steps push the residual to the noise floor
      if (++polish > 2) break;
    }
    Mat g;
    try {
      g = model.fundamental(x, y);
    } catch (const FinslerError&) {
      break;
    }
    const Vec step = g.ldlt().solve(-r);
    double lambda = 1.0;
    bool improved = false;
    for (int k = 0; k < 40; ++k) {
      const Vec trial = y + lambda * step;
      if (trial.norm() > 0.0) {
        const Vec rt = model.legendre(x, trial) - a;
        if (rt.norm() < res) {
          y = trial;
          r = rt;
          res = rt.norm();
          improved = true;
          break;
        }
      }
      lambda *= 0.5;
    }
    if (!improved) break;
  }
  if (residual_out) *residual_out = res;
  if (!(res <= tol)) return std::nullopt;
  return y;
}

}  // namespace detail

Vec NormModel::inverse_legendre(const Vec& x, const Vec& a) const {
  const double an = a.norm();
  if (an == 0.0) return Vec::Zero(a.size());
  double best_res = std::numeric_limits<double>::infinity();
  auto attempt = [&](const Vec& dir) -> std::optional<Vec> {
    const double fd = norm(x, dir);
    const Vec unit = dir / fd;
    const double est = std::max(a.dot(unit), 1e-3 * an);  // lower estimate of F*(a)
    double res = 0.0;
    auto y = detail::newton_inverse_legendre(*this, x, a, est * unit, &res);
    best_res = std::min(best_res, res);
    return y;
  };
  if (auto y = attempt(a)) return *y;
  const auto n = a.size();
  for (Eigen::Index i = 0; i < n; ++i) {
    for (double sign : {1.0, -1.0}) {
      Vec e = Vec::Zero(n);
      e[i] = sign;
      if (auto y = attempt(e)) return *y;
    }
  }
  throw NumericError("inverse Legendre transform did not converge", best_res);
}

double NormModel::dual_norm(const Vec& x, const Vec& a) const {
  if (a.norm() == 0.0) return 0.0;
  const auto n = a.size();
  Vec best_dir;
  double best = -std::numeric_limits<double>::infinity();
  auto consider = [&](const Vec& w) {
    const double ratio = a.dot(w) / norm(x, w);
    if (ratio > best) {
      best = ratio;
      best_dir = w;
    }
  };
  if (n == 2) {
    constexpr int kSamples = 720;
    for (int k = 0; k < kSamples; ++k) {
      const double th = 2.0 * std::numbers::pi * k / kSamples;
      consider(make_vec({std::cos(th), std::sin(th)}));
    }
  } else {
    Rng rng(0x5eedULL);
    for (int k = 0; k < 4000; ++k) consider(rng.direction(static_cast<int>(n)));
  }
  // refine: the maximiser is the direction of J*(a), with F(J*(a)) = F*(a)
  const Vec y0 = best * best_dir / norm(x, best_dir);
  double res = 0.0;
  if (auto y = detail::newton_inverse_legendre(*this, x, a, y0, &res)) return norm(x, *y);
  try {
    return norm(x, inverse_legendre(x, a));
  } catch (const NumericError& e) {
    throw NumericError("dual norm refinement did not converge (sampled sup " + std::to_string(best) + ")",
                       e.residual());
  }
}

Vec NormModel::lagrangian_x(const Vec& x, const Vec& y) const {
  if (point_independent()) return Vec::Zero(x.size());
  auto lag = [&](const Vec& z) {
    const double f = norm(z, y);
    return 0.5 * f * f;
  };
  return numdiff::gradient(lag, x, numdiff::first_order_step() * std::max(1.0, x.norm()));
}

Mat NormModel::legendre_x(const Vec& x, const Vec& y) const {
  if (point_independent()) return Mat::Zero(x.size(), x.size());
  auto leg = [&](const Vec& z) { return legendre(z, y); };
  return numdiff::jacobian(leg, x, numdiff::first_order_step() * std::max(1.0, x.norm()));
}

Vec NormModel::spray(const Vec& x, const Vec& y) const {
  if (point_independent()) return Vec::Zero(x.size());
  const Mat g = fundamental(x, y);
  const Vec rhs = legendre_x(x, y) * y - lagrangian_x(x, y);
  return 0.5 * g.ldlt().solve(rhs);
}

std::shared_ptr<const NormModel> NormModel::reversed(std::shared_ptr<const NormModel> self) const {
  return std::make_shared<detail::ReversedModel>(std::move(self));
}

// ---------------------------------------------------------------------------
// Built-in models

namespace detail {

double QuadraticModel::norm(const Vec& x, const Vec& y) const {
  return std::sqrt(std::max(0.0, y.dot(metric_->value(x) * y)));
}

Vec QuadraticModel::legendre(const Vec& x, const Vec& y) const { return metric_->value(x) * y; }

Mat QuadraticModel::fundamental(const Vec& x, const Vec& y) const {
  if (y.norm() == 0.0) throw DegenerateDirectionError("fundamental tensor at the zero vector");
  return metric_->value(x);
}

Vec QuadraticModel::inverse_legendre(const Vec& x, const Vec& a) const { return metric_->value(x).ldlt().solve(a); }

double QuadraticModel::dual_norm(const Vec& x, const Vec& a) const {
  return std::sqrt(std::max(0.0, a.dot(metric_->value(x).ldlt().solve(a))));
}

Vec QuadraticModel::lagrangian_x(const Vec& x, const Vec& y) const {
  const auto n = x.size();
  Vec out(n);
  for (Eigen::Index k = 0; k < n; ++k) out[k] = 0.5 * y.dot(metric_->partial(x, static_cast<int>(k)) * y);
  return out;
}

Mat QuadraticModel::legendre_x(const Vec& x, const Vec& y) const {
  const auto n = x.size();
  Mat m(n, n);
  for (Eigen::Index k = 0; k < n; ++k) m.col(k) = metric_->partial(x, static_cast<int>(k)) * y;
  return m;
}

Vec QuadraticModel::spray(const Vec& x, const Vec& y) const {
  if (metric_->constant()) return Vec::Zero(x.size());
  const auto n = x.size();
  Vec rhs = Vec::Zero(n);
  for (Eigen::Index k = 0; k < n; ++k) {
    const Vec dky = metric_->partial(x, static_cast<int>(k)) * y;
    rhs += dky * y[k];
    rhs[k] -= 0.5 * y.dot(dky);
  }
  return 0.5 * metric_->value(x).ldlt().solve(rhs);
}

double RandersModel::norm(const Vec& x, const Vec& y) const {
  const Mat a = alpha_->value(x);
  return std::sqrt(std::max(0.0, y.dot(a * y))) + beta_->value(x).dot(y);
}

Vec RandersModel::legendre(const Vec& x, const Vec& y) const {
  const Mat a = alpha_->value(x);
  const Vec ay = a * y;
  const double s = std::sqrt(std::max(0.0, y.dot(ay)));
  if (s == 0.0) return Vec::Zero(y.size());
  const Vec b = beta_->value(x);
  const double F = s + b.dot(y);
  return F * (ay / s + b);
}

Mat RandersModel::fundamental(const Vec& x, const Vec& y) const {
  const Mat a = alpha_->value(x);
  const Vec ay = a * y;
  const double s = std::sqrt(std::max(0.0, y.dot(ay)));
  if (s == 0.0) throw DegenerateDirectionError("fundamental tensor at the zero vector");
  const Vec b = beta_->value(x);
  const double F = s + b.dot(y);
  const Vec Fy = ay / s + b;
  const Mat Fyy = (a - ay * ay.transpose() / (s * s)) / s;
  Mat g = F * Fyy + Fy * Fy.transpose();
  return 0.5 * (g + g.transpose());
}

double RandersModel::one_form_norm(const Vec& x) const {
  const Vec b = beta_->value(x);
  return std::sqrt(std::max(0.0, b.dot(alpha_->value(x).ldlt().solve(b))));
}

namespace {

// Dual of a Randers norm is again of Randers type: F*(xi) = sqrt(xi^T m xi) + w . xi.
struct DualRanders {
  Mat m;
  Vec w;
};

DualRanders dual_randers(const Mat& a, const Vec& b) {
  const Mat ainv = solve_inverse(a);
  const Vec w0 = ainv * b;
  const double lam = 1.0 - b.dot(w0);
  if (!(lam > 0.0)) throw MetricError("Randers one-form has alpha-norm >= 1");
  return {(lam * ainv + w0 * w0.transpose()) / (lam * lam), -w0 / lam};
}

}  // namespace

Vec RandersModel::inverse_legendre(const Vec& x, const Vec& xi) const {
  if (xi.norm() == 0.0) return Vec::Zero(xi.size());
  const auto d = dual_randers(alpha_->value(x), beta_->value(x));
  const Vec mxi = d.m * xi;
  const double s = std::sqrt(std::max(0.0, xi.dot(mxi)));
  const double Fs = s + d.w.dot(xi);
  return Fs * (mxi / s + d.w);
}

double RandersModel::dual_norm(const Vec& x, const Vec& xi) const {
  if (xi.norm() == 0.0) return 0.0;
  const auto d = dual_randers(alpha_->value(x), beta_->value(x));
  return std::sqrt(std::max(0.0, xi.dot(d.m * xi))) + d.w.dot(xi);
}

Vec RandersModel::lagrangian_x(const Vec& x, const Vec& y) const {
  const auto n = x.size();
  if (point_independent()) return Vec::Zero(n);
  const Mat a = alpha_->value(x);
  const double s = std::sqrt(std::max(0.0, y.dot(a * y)));
  const double F = s + beta_->value(x).dot(y);
  Vec out(n);
  for (Eigen::Index k = 0; k < n; ++k) {
    const int kk = static_cast<int>(k);
    const double dF = y.dot(alpha_->partial(x, kk) * y) / (2.0 * s) + beta_->partial(x, kk).dot(y);
    out[k] = F * dF;
  }
  return out;
}

Mat RandersModel::legendre_x(const Vec& x, const Vec& y) const {
  const auto n = x.size();
  if (point_independent()) return Mat::Zero(n, n);
  const Mat a = alpha_->value(x);
  const Vec ay = a * y;
  const double s = std::sqrt(std::max(0.0, y.dot(ay)));
  const Vec b = beta_->value(x);
  const double F = s + b.dot(y);
  const Vec Fy = ay / s + b;
  Mat m(n, n);
  for (Eigen::Index k = 0; k < n; ++k) {
    const int kk = static_cast<int>(k);
    const Mat da = alpha_->partial(x, kk);
    const Vec day = da * y;
    const double q = y.dot(day);
    const Vec db = beta_->partial(x, kk);
    const double dF = q / (2.0 * s) + db.dot(y);
    const Vec dFy = day / s - ay * (q / (2.0 * s * s * s)) + db;
    m.col(k) = dF * Fy + F * dFy;
  }
  return m;
}

std::shared_ptr<const NormModel> RandersModel::reversed(std::shared_ptr<const NormModel>) const {
  if (auto neg = std::dynamic_pointer_cast<const NegatedOneForm>(beta_))
    return std::make_shared<RandersModel>(alpha_, neg->base());
  return std::make_shared<RandersModel>(alpha_, std::make_shared<NegatedOneForm>(beta_));
}

Vec CustomModel::lagrangian_x(const Vec& x, const Vec& y) const { return NormModel::lagrangian_x(x, y); }

Mat CustomModel::legendre_x(const Vec& x, const Vec& y) const { return NormModel::legendre_x(x, y); }

}  // namespace detail

// ---------------------------------------------------------------------------
// FinslerStructure

FinslerStructure::FinslerStructure(ManifoldChart chart, Family family, std::shared_ptr<const NormModel> model,
                                   bool reversible, std::string id)
    : chart_(std::move(chart)), family_(family), model_(std::move(model)), reversible_(reversible),
      id_(std::move(id)) {
  if (!model_) throw FinslerError(ErrorCode::invalid_argument, "structure without a norm model");
  if (id_.empty()) id_ = std::string(to_string(family_)) + ":" + model_->describe();
}

FinslerStructure FinslerStructure::euclidean(int dimension) {
  auto model = std::make_shared<detail::QuadraticModel>(make_matrix_preset("identity", dimension, {}));
  return FinslerStructure(ManifoldChart::full(dimension), Family::euclidean, model, true, {});
}

FinslerStructure FinslerStructure::riemannian(ManifoldChart chart, std::shared_ptr<const MatrixField> metric,
                                              std::string id) {
  auto model = std::make_shared<detail::QuadraticModel>(std::move(metric));
  return FinslerStructure(std::move(chart), Family::riemannian, model, true, std::move(id));
}

FinslerStructure FinslerStructure::hyperbolic(int dimension) {
  Vec lo = Vec::Constant(dimension, -std::numeric_limits<double>::infinity());
  Vec hi = Vec::Constant(dimension, std::numeric_limits<double>::infinity());
  lo[dimension - 1] = 0.0;
  return riemannian(ManifoldChart(lo, hi), make_matrix_preset("hyperbolic", dimension, {}));
}

FinslerStructure FinslerStructure::minkowski(const Mat& a, const Vec& b) {
  const int n = static_cast<int>(a.rows());
  std::vector<double> entries(a.data(), a.data() + a.size());
  auto alpha = make_matrix_preset("constant", n, entries);
  std::vector<double> bv(b.data(), b.data() + b.size());
  auto beta = make_one_form_preset("constant", n, bv);
  auto model = std::make_shared<detail::RandersModel>(alpha, beta);
  if (!(model->one_form_norm(Vec::Zero(n)) < 1.0)) throw MetricError("minkowski one-form has alpha-norm >= 1");
  return FinslerStructure(ManifoldChart::full(n), Family::minkowski, model, b.norm() == 0.0, {});
}

FinslerStructure FinslerStructure::randers(ManifoldChart chart, std::shared_ptr<const MatrixField> alpha,
                                           std::shared_ptr<const OneFormField> beta, std::string id) {
  auto model = std::make_shared<detail::RandersModel>(std::move(alpha), std::move(beta));
  const bool zero_beta = model->beta().constant() && model->beta().value(Vec::Zero(chart.dimension())).norm() == 0.0;
  return FinslerStructure(std::move(chart), Family::randers, model, zero_beta, std::move(id));
}

FinslerStructure FinslerStructure::randers_constant(const Vec& beta) {
  const int n = static_cast<int>(beta.size());
  std::vector<double> bv(beta.data(), beta.data() + beta.size());
  auto b = make_one_form_preset("constant", n, bv);
  if (!(beta.norm() < 1.0)) throw MetricError("Randers one-form has alpha-norm >= 1");
  return randers(ManifoldChart::full(n), make_matrix_preset("identity", n, {}), b);
}

FinslerStructure FinslerStructure::custom(ManifoldChart chart, std::function<double(const Vec&, const Vec&)> norm,
                                          bool point_independent, bool reversible, std::string id) {
  auto model = std::make_shared<detail::CustomModel>(std::move(norm), point_independent, id);
  return FinslerStructure(std::move(chart), Family::custom, model, reversible, "custom:" + id);
}

FinslerStructure FinslerStructure::custom_preset(std::string_view name, int dimension,
                                                 const std::vector<double>& params) {
  if (name == "quartic") {
    auto fn = [](const Vec&, const Vec& y) { return std::pow(y.array().pow(4).sum(), 0.25); };
    return custom(ManifoldChart::full(dimension), fn, true, true, "quartic");
  }
  if (name == "swirl-randers") {
    const double amp = params.empty() ? 0.5 : params[0];
    if (!(std::abs(amp) < 2.0)) throw MetricError("swirl-randers amplitude must be below 2");
    auto fn = [amp](const Vec& x, const Vec& y) {
      return y.norm() + amp * (-x[1] * y[0] + x[0] * y[1]) / (1.0 + x.squaredNorm());
    };
    std::ostringstream id;
    id.precision(17);
    id << "swirl-randers[" << amp << "]";
    return custom(ManifoldChart::full(dimension), fn, false, amp == 0.0, id.str());
  }
  throw FinslerError(ErrorCode::invalid_argument, "unknown custom preset '" + std::string(name) + "'");
}

double FinslerStructure::norm(const Vec& x, const Vec& y) const {
  chart_.require_contains(x, "base point");
  return model_->norm(x, y);
}

Vec sample_chart_point(const ManifoldChart& chart, Rng& rng, double window) {
  const int n = chart.dimension();
  Vec x(n);
  for (int i = 0; i < n; ++i) {
    const double lo = chart.lower()[i];
    const double hi = chart.upper()[i];
    const bool lo_inf = std::isinf(lo);
    const bool hi_inf = std::isinf(hi);
    if (lo_inf && hi_inf) {
      x[i] = rng.uniform(-window, window);
    } else if (!lo_inf && hi_inf) {
      x[i] = lo + rng.uniform(0.25, 0.25 + window);
    } else if (lo_inf && !hi_inf) {
      x[i] = hi - rng.uniform(0.25, 0.25 + window);
    } else {
      const double pad = 0.05 * (hi - lo);
      x[i] = rng.uniform(std::max(lo + pad, -window), std::min(hi - pad, window));
      if (!(x[i] > lo && x[i] < hi)) x[i] = 0.5 * (lo + hi);
    }
  }
  return x;
}

}  // namespace finsler
