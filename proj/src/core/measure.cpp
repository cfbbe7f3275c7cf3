#include "finsler/measure.hpp"

#include "finsler/numdiff.hpp"
#include "models.hpp"
#include "quadrature.hpp"

#include <cmath>
#include <numbers>

namespace finsler {

std::string_view to_string(VolumeKind kind) {
  return kind == VolumeKind::busemann_hausdorff ? "busemann-hausdorff" : "holmes-thompson";
}

VolumeKind volume_kind_from_string(std::string_view name) {
  if (name == "busemann-hausdorff" || name == "bh") return VolumeKind::busemann_hausdorff;
  if (name == "holmes-thompson" || name == "ht") return VolumeKind::holmes_thompson;
  throw FinslerError(ErrorCode::invalid_argument, "unknown volume form '" + std::string(name) + "'");
}

double unit_ball_volume(int n) {
  return std::pow(std::numbers::pi, 0.5 * n) / std::tgamma(0.5 * n + 1.0);
}

double sphere_integral(int n, int m, const std::function<double(const Vec&)>& f) {
  const double pi = std::numbers::pi;
  if (n == 2) {
    double sum = 0.0;
    for (int k = 0; k < m; ++k) {
      const double th = 2.0 * pi * k / m;
      sum += f(make_vec({std::cos(th), std::sin(th)}));
    }
    return sum * 2.0 * pi / m;
  }
  const auto& gl = detail::gauss_legendre(m);
  const int mphi = 2 * m;
  const double wphi = 2.0 * pi / mphi;
  if (n == 3) {
    double sum = 0.0;
    for (int i = 0; i < m; ++i) {
      const double u = gl.nodes[i];
      const double s = std::sqrt(1.0 - u * u);
      double ring = 0.0;
      for (int k = 0; k < mphi; ++k) {
        const double ph = 2.0 * pi * k / mphi;
        ring += f(make_vec({s * std::cos(ph), s * std::sin(ph), u}));
      }
      sum += gl.weights[i] * ring * wphi;
    }
    return sum;
  }
  if (n == 4) {
    double sum = 0.0;
    for (int a = 0; a < m; ++a) {
      const double psi = 0.5 * pi * (gl.nodes[a] + 1.0);
      const double wpsi = 0.5 * pi * gl.weights[a] * std::sin(psi) * std::sin(psi);
      for (int i = 0; i < m; ++i) {
        const double u = gl.nodes[i];
        const double s = std::sqrt(1.0 - u * u);
        double ring = 0.0;
        for (int k = 0; k < mphi; ++k) {
          const double ph = 2.0 * pi * k / mphi;
          ring += f(make_vec({std::cos(psi), std::sin(psi) * u, std::sin(psi) * s * std::cos(ph),
                              std::sin(psi) * s * std::sin(ph)}));
        }
        sum += wpsi * gl.weights[i] * ring * wphi;
      }
    }
    return sum;
  }
  throw FinslerError(ErrorCode::invalid_argument, "sphere quadrature supports dimensions 2 to 4");
}

VolumeForm::VolumeForm(FinslerStructure F, VolumeKind kind, double rel_tolerance)
    : F_(std::move(F)), kind_(kind), rel_tolerance_(rel_tolerance) {
  closed_form_ = F_.model().quadratic_matrix(Vec::Zero(F_.dimension())).has_value() ||
                 F_.family() == Family::euclidean || F_.family() == Family::riemannian;
  constant_ = F_.point_independent();
  if (constant_) {
    Vec x = Vec::Zero(F_.dimension());
    if (!F_.chart().contains(x)) {
      Rng rng(1);
      x = sample_chart_point(F_.chart(), rng);
    }
    constant_value_ = closed_form_ ? std::sqrt(F_.model().quadratic_matrix(x)->determinant())
                                   : quadrature_density(x);
  }
}

double VolumeForm::quadrature_density(const Vec& x) const {
  const int n = F_.dimension();
  const NormModel& m = F_.model();
  auto integrand = [&](const Vec& y) {
    const double f = m.norm(x, y);
    const double w = std::pow(f, -n);
    if (kind_ == VolumeKind::busemann_hausdorff) return w;
    return m.fundamental(x, y).determinant() * w;
  };
  int res = n == 2 ? 64 : 8;
  const int max_res = n == 2 ? (1 << 15) : (n == 3 ? 256 : 64);
  double prev = sphere_integral(n, res, integrand);
  double change = 1.0;
  while (res < max_res) {
    res *= 2;
    const double cur = sphere_integral(n, res, integrand);
    change = std::abs(cur - prev) / std::abs(cur);
    prev = cur;
    if (change < rel_tolerance_) break;
  }
  if (!(change < std::max(rel_tolerance_, 1e-6)))
    throw NumericError("volume density quadrature did not converge", change);
  const double integral = prev / n;
  const double ball = unit_ball_volume(n);
  return kind_ == VolumeKind::busemann_hausdorff ? ball / integral : integral / ball;
}

double VolumeForm::density(const Vec& x) const {
  F_.chart().require_contains(x, "volume density point");
  if (constant_) return constant_value_;
  if (closed_form_) return std::sqrt(F_.model().quadratic_matrix(x)->determinant());
  return quadrature_density(x);
}

Vec VolumeForm::log_density_gradient(const Vec& x) const {
  const int n = F_.dimension();
  if (constant_) return Vec::Zero(n);
  if (const auto* quad = dynamic_cast<const detail::QuadraticModel*>(&F_.model())) {
    // d log sqrt(det a) = tr(a^-1 da) / 2
    const Mat a = quad->metric().value(x);
    const auto ldlt = a.ldlt();
    Vec out(n);
    for (int k = 0; k < n; ++k) out[k] = 0.5 * ldlt.solve(quad->metric().partial(x, k)).trace();
    return out;
  }
  auto logd = [&](const Vec& z) { return std::log(density(z)); };
  return numdiff::gradient(logd, x, 1e-3 * std::max(1.0, x.norm()));
}

}  // namespace finsler
