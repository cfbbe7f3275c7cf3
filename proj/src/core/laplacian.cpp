#include "finsler/laplacian.hpp"

#include "finsler/distance.hpp"
#include "finsler/fields.hpp"
#include "finsler/numdiff.hpp"
#include "quadrature.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

namespace finsler {

namespace {

// Step scale that keeps stencils well inside the chart.
double local_scale(const ManifoldChart& chart, const Vec& x) {
  double room = std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    room = std::min(room, x[i] - chart.lower()[i]);
    room = std::min(room, chart.upper()[i] - x[i]);
  }
  return std::min(1.0, 0.25 * room) * std::max(1.0, x.norm());
}

Vec legendre_dual(const FinslerStructure& F, const Vec& x, const Vec& xi) {
  if (xi.cwiseAbs().maxCoeff() < kZeroDifferential) return Vec::Zero(xi.size());
  return F.model().inverse_legendre(x, xi);
}

// Tensor Gauss-Legendre over a box; f returns the integrand.
template <class Fn>
double box_integral(const Box& box, int m, Fn&& f) {
  const auto& gl = detail::gauss_legendre(m);
  const int n = static_cast<int>(box.lower.size());
  const Vec c = box.center();
  const Vec hw = box.half_width();
  long long total = 1;
  for (int i = 0; i < n; ++i) total *= m;
  double sum = 0.0;
  Vec x(n);
  for (long long idx = 0; idx < total; ++idx) {
    long long t = idx;
    double w = 1.0;
    for (int i = 0; i < n; ++i) {
      const int k = static_cast<int>(t % m);
      t /= m;
      x[i] = c[i] + hw[i] * gl.nodes[k];
      w *= hw[i] * gl.weights[k];
    }
    sum += w * f(x);
  }
  return sum;
}

}  // namespace

LaplacianReport shen_laplacian(const FinslerStructure& F, const VolumeForm& mu, const ScalarField& f, const Vec& x) {
  F.chart().require_contains(x, "Laplacian point");
  if (mu.structure().dimension() != F.dimension())
    throw FinslerError(ErrorCode::invalid_argument, "volume form belongs to a structure of another dimension");
  LaplacianReport rep;
  rep.point = x;
  rep.differential_source = f.differential ? "supplied" : "finite-difference";
  rep.hessian_source = f.hessian ? "supplied" : (f.differential ? "differential-difference" : "value-difference");
  rep.metric_source = std::string(to_string(F.provider()));
  rep.density_source = std::string(mu.provenance());
  rep.differential = f.differential_at(x);
  const int n = F.dimension();
  if (rep.differential.cwiseAbs().maxCoeff() < kZeroDifferential) {
    rep.zero_differential = true;
    rep.gradient = Vec::Zero(n);
    return rep;
  }
  const Mat H = f.hessian_at(x);
  rep.gradient = F.model().inverse_legendre(x, rep.differential);
  double div = 0.0;
  if (F.point_independent()) {
    const Mat g = F.model().fundamental(x, rep.gradient);
    div = g.ldlt().solve(H).trace();
  } else {
    const double h = 2e-3 * local_scale(F.chart(), x);
    auto stencil = [&](double s) {
      double sum = 0.0;
      for (int k = 0; k < n; ++k) {
        Vec xp = x, xm = x;
        xp[k] += s;
        xm[k] -= s;
        const Vec vp = legendre_dual(F, xp, rep.differential + s * H.col(k));
        const Vec vm = legendre_dual(F, xm, rep.differential - s * H.col(k));
        sum += (vp[k] - vm[k]) / (2.0 * s);
      }
      return sum;
    };
    const double d1 = stencil(h);
    const double d2 = stencil(2.0 * h);
    div = (4.0 * d1 - d2) / 3.0;
    rep.stencil_gap = std::abs(d1 - d2);
  }
  rep.value = div + rep.gradient.dot(mu.log_density_gradient(x));
  return rep;
}

double Bump::value(const Vec& x) const {
  const Vec c = support.center();
  const Vec hw = support.half_width();
  double v = 1.0;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double s = (x[i] - c[i]) / hw[i];
    if (std::abs(s) >= 1.0) return 0.0;
    const double q = 1.0 - s * s;
    v *= q * q * q;
  }
  return v;
}

Vec Bump::differential(const Vec& x) const {
  const Vec c = support.center();
  const Vec hw = support.half_width();
  const auto n = x.size();
  Vec factors(n), derivs(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double s = (x[i] - c[i]) / hw[i];
    if (std::abs(s) >= 1.0) return Vec::Zero(n);
    const double q = 1.0 - s * s;
    factors[i] = q * q * q;
    derivs[i] = -6.0 * s * q * q / hw[i];
  }
  Vec out(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    double prod = derivs[i];
    for (Eigen::Index j = 0; j < n; ++j)
      if (j != i) prod *= factors[j];
    out[i] = prod;
  }
  return out;
}

Bump nested_bump(const Box& domain, int j) {
  if (j < 0 || j > 4) throw FinslerError(ErrorCode::invalid_argument, "bump index must be in 0..4");
  const double frac = 1.0 - 0.18 * j;
  const Vec c = domain.center();
  const Vec hw = domain.half_width() * frac;
  return Bump{Box{c - hw, c + hw}};
}

double weak_laplacian_pairing(const FinslerStructure& F, const VolumeForm& mu, const ScalarField& u,
                              const Bump& phi, int m) {
  return -box_integral(phi.support, m, [&](const Vec& x) {
    const Vec grad = legendre_dual(F, x, u.differential_at(x));
    return phi.differential(x).dot(grad) * mu.density(x);
  });
}

double bump_mass(const VolumeForm& mu, const Bump& phi, int m) {
  return box_integral(phi.support, m, [&](const Vec& x) { return phi.value(x) * mu.density(x); });
}

double weak_strong_gap(const FinslerStructure& F, const VolumeForm& mu, const ScalarField& u, const Bump& phi,
                       int m) {
  return std::abs(box_integral(phi.support, m, [&](const Vec& x) {
    const Vec grad = legendre_dual(F, x, u.differential_at(x));
    return (phi.value(x) * shen_laplacian(F, mu, u, x).value + phi.differential(x).dot(grad)) * mu.density(x);
  }));
}

WeakResidualReport weak_laplacian_residual(const FinslerStructure& F, const VolumeForm& mu, const ScalarField& u,
                                           double h, const Box& domain, int m) {
  if (domain.lower.size() != F.dimension() || domain.upper.size() != F.dimension())
    throw FinslerError(ErrorCode::invalid_argument, "weak Laplacian box has the wrong dimension");
  F.chart().require_contains(domain.lower, "box corner");
  F.chart().require_contains(domain.upper, "box corner");
  WeakResidualReport rep;
  rep.nodes_per_axis = m;
  for (int j = 0; j < 5; ++j) {
    const Bump phi = nested_bump(domain, j);
    // h int phi dmu + int dphi(grad u) dmu, accumulated in one pass
    const double r = box_integral(phi.support, m, [&](const Vec& x) {
      const Vec grad = legendre_dual(F, x, u.differential_at(x));
      return (h * phi.value(x) + phi.differential(x).dot(grad)) * mu.density(x);
    });
    rep.residuals.push_back(std::abs(r));
    rep.max_residual = std::max(rep.max_residual, std::abs(r));
  }
  return rep;
}

MeanCurvatureReport level_set_mean_curvature(const FinslerStructure& F, const VolumeForm& mu, const ScalarField& r,
                                             const Vec& x) {
  MeanCurvatureReport rep;
  const LaplacianReport lap = shen_laplacian(F, mu, r, x);
  if (lap.zero_differential) throw GeometricError("level set is degenerate: dr vanishes");
  rep.laplacian = lap.value;

  const int n = F.dimension();
  const double scale = local_scale(F.chart(), x);
  const double delta = 1e-2 * scale;
  const double eps = 1e-3 * scale;
  constexpr int kSubsteps = 2;
  auto field = [&](const Vec& z) { return legendre_dual(F, z, r.differential_at(z)); };
  // flow for times +-delta and +-2 delta from z: returns {Phi(-2d), Phi(-d), Phi(d), Phi(2d)}
  auto flows = [&](const Vec& z) {
    std::array<Vec, 4> out;
    for (int sign : {-1, 1}) {
      Vec y = z;
      const double dt = sign * delta / kSubsteps;
      for (int leg = 1; leg <= 2; ++leg) {
        for (int s = 0; s < kSubsteps; ++s) {
          const Vec k1 = field(y);
          const Vec k2 = field(y + 0.5 * dt * k1);
          const Vec k3 = field(y + 0.5 * dt * k2);
          const Vec k4 = field(y + dt * k3);
          y += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        }
        out[(sign < 0 ? 2 - leg : 1 + leg)] = y;
      }
    }
    return out;
  };
  const auto center = flows(x);
  std::vector<std::array<Vec, 4>> plus(n), minus(n);
  for (int k = 0; k < n; ++k) {
    Vec a = x, b = x;
    a[k] += eps;
    b[k] -= eps;
    plus[k] = flows(a);
    minus[k] = flows(b);
  }
  auto log_volume = [&](int slot) {
    Mat D(n, n);
    for (int k = 0; k < n; ++k) D.col(k) = (plus[k][slot] - minus[k][slot]) / (2.0 * eps);
    return std::log(mu.density(center[slot])) + std::log(std::abs(D.determinant()));
  };
  const double l_m2 = log_volume(0), l_m1 = log_volume(1), l_p1 = log_volume(2), l_p2 = log_volume(3);
  const double d1 = (l_p1 - l_m1) / (2.0 * delta);
  const double d2 = (l_p2 - l_m2) / (4.0 * delta);
  rep.flow = (4.0 * d1 - d2) / 3.0;
  rep.gap = std::abs(rep.flow - rep.laplacian);
  return rep;
}

HarmonicityReport harmonicity_check(const FinslerStructure& F, const VolumeForm& mu, const Vec& p,
                                    const std::vector<double>& radii_in, int m, double threshold) {
  F.chart().require_contains(p, "harmonicity base point");
  if (m < 2) throw FinslerError(ErrorCode::invalid_argument, "harmonicity check needs at least two directions");
  const int n = F.dimension();
  HarmonicityReport rep;
  rep.base = p;
  rep.threshold = threshold;
  std::vector<double> radii = radii_in;
  std::sort(radii.begin(), radii.end());
  constexpr double kAngleStep = 1e-4;
  const double sigma_p = mu.density(p);

  // Euclidean unit directions
  std::vector<Vec> hats;
  if (n == 2) {
    for (int k = 0; k < m; ++k) {
      const double th = 2.0 * std::numbers::pi * k / m;
      hats.push_back(make_vec({std::cos(th), std::sin(th)}));
    }
  } else {
    Rng rng(0x4a12ULL);
    for (int k = 0; k < m; ++k) hats.push_back(rng.direction(n));
  }

  auto on_indicatrix = [&](const Vec& y) { return Vec(y / F.model().norm(p, y)); };
  std::ostringstream notes;
  rep.density.assign(radii.size(), std::vector<double>(m, 0.0));
  rep.raw.assign(radii.size(), std::vector<double>(m, 0.0));
  std::vector<bool> usable(radii.size(), true);

  for (int k = 0; k < m; ++k) {
    const Vec& yhat = hats[k];
    // orthonormal basis of the tangent plane of the Euclidean sphere at yhat:
    // Q columns 1..n-1 after QR of [yhat, e_j (j != dominant axis)]
    Eigen::Index dominant;
    yhat.cwiseAbs().maxCoeff(&dominant);
    Mat basis(n, n);
    basis.col(0) = yhat;
    for (int j = 0, col = 1; j < n; ++j) {
      if (j == dominant) continue;
      basis.col(col++) = Vec::Unit(n, j);
    }
    const Mat Q = Eigen::HouseholderQR<Mat>(basis).householderQ();
    const Vec u = on_indicatrix(yhat);
    rep.directions.push_back(u);
    std::vector<Vec> du_plus(n - 1), du_minus(n - 1), du(n - 1);
    for (int j = 0; j < n - 1; ++j) {
      du_plus[j] = on_indicatrix(yhat + kAngleStep * Q.col(j + 1));
      du_minus[j] = on_indicatrix(yhat - kAngleStep * Q.col(j + 1));
      du[j] = (du_plus[j] - du_minus[j]) / (2.0 * kAngleStep);
    }
    // induced metric on the indicatrix at u
    const Mat g = F.model().fundamental(p, u);
    Mat G(n - 1, n - 1);
    for (int a = 0; a < n - 1; ++a)
      for (int b = 0; b < n - 1; ++b) G(a, b) = du[a].dot(g * du[b]);
    const double sqrt_det_G = std::sqrt(G.determinant());
    Mat flat(n, n);
    flat.col(0) = u;
    for (int j = 0; j < n - 1; ++j) flat.col(j + 1) = du[j];
    const double flat_det = std::abs(flat.determinant());

    for (std::size_t i = 0; i < radii.size(); ++i) {
      if (!usable[i]) continue;
      const double r = radii[i];
      try {
        const GeodesicState s = flow(F, {p, u}, r);
        Mat jac(n, n);
        jac.col(0) = s.v;
        for (int j = 0; j < n - 1; ++j) {
          const Vec a = flow(F, {p, du_plus[j]}, r).x;
          const Vec b = flow(F, {p, du_minus[j]}, r).x;
          jac.col(j + 1) = (a - b) / (2.0 * kAngleStep);
        }
        const double polar = mu.density(s.x) * std::abs(jac.determinant());
        rep.raw[i][k] = polar / sqrt_det_G;
        rep.density[i][k] = polar / (sigma_p * std::pow(r, n - 1) * flat_det);
      } catch (const DomainExit&) {
        usable[i] = false;
      }
    }
  }
  auto deviation = [](const std::vector<double>& row) {
    const auto [lo, hi] = std::minmax_element(row.begin(), row.end());
    double mean = 0.0;
    for (double v : row) mean += v;
    mean /= static_cast<double>(row.size());
    return (*hi - *lo) / std::abs(mean);
  };
  for (std::size_t i = 0; i < radii.size(); ++i) {
    if (!usable[i]) {
      notes << "radius " << radii[i] << " left the chart and was halved; ";
      continue;
    }
    rep.radii.push_back(radii[i]);
    rep.radial_deviation = std::max(rep.radial_deviation, deviation(rep.density[i]));
    rep.raw_radial_deviation = std::max(rep.raw_radial_deviation, deviation(rep.raw[i]));
  }
  // drop rows of radii that left the chart, retrying them at half size
  std::vector<std::vector<double>> density, raw;
  for (std::size_t i = 0; i < radii.size(); ++i) {
    if (usable[i]) {
      density.push_back(rep.density[i]);
      raw.push_back(rep.raw[i]);
    }
  }
  rep.density = std::move(density);
  rep.raw = std::move(raw);
  std::vector<double> shrunk;
  for (std::size_t i = 0; i < radii.size(); ++i)
    if (!usable[i] && radii[i] / 2.0 > 1e-3) shrunk.push_back(radii[i] / 2.0);
  if (!shrunk.empty()) {
    HarmonicityReport sub = harmonicity_check(F, mu, p, shrunk, m, threshold);
    for (std::size_t i = 0; i < sub.radii.size(); ++i) {
      rep.radii.push_back(sub.radii[i]);
      rep.density.push_back(sub.density[i]);
      rep.raw.push_back(sub.raw[i]);
    }
    rep.radial_deviation = std::max(rep.radial_deviation, sub.radial_deviation);
    rep.raw_radial_deviation = std::max(rep.raw_radial_deviation, sub.raw_radial_deviation);
    notes << sub.notes;
  }
  rep.notes = notes.str();
  rep.harmonic = !rep.radii.empty() && rep.radial_deviation <= threshold;
  return rep;
}

HorosphereLimitReport horosphere_mean_curvature_limit(const FinslerStructure& F, const VolumeForm& mu, const Vec& p,
                                                      const Vec& v, const std::vector<double>& t_list) {
  HorosphereLimitReport rep;
  std::ostringstream notes;
  for (double t : t_list) {
    try {
      const Vec c = exp_map(F, p, -v, t);
      ScalarField r = fields::distance_from(F, c);
      r.step = 1e-3 * local_scale(F.chart(), p);
      const LaplacianReport lap = shen_laplacian(F, mu, r, p);
      rep.t.push_back(t);
      rep.curvature.push_back(lap.value);
    } catch (const FinslerError& e) {
      notes << "t = " << t << ": " << e.what() << "; ";
    }
  }
  const std::size_t k = rep.t.size();
  auto extrapolate = [&](std::size_t i, std::size_t j) {
    return (rep.t[j] * rep.curvature[j] - rep.t[i] * rep.curvature[i]) / (rep.t[j] - rep.t[i]);
  };
  if (k >= 2) {
    rep.limit = extrapolate(k - 2, k - 1);
    rep.error_bar = k >= 3 ? std::abs(rep.limit - extrapolate(k - 3, k - 2)) : std::abs(rep.limit - rep.curvature.back());
  } else if (k == 1) {
    rep.limit = rep.curvature[0];
    rep.error_bar = std::numeric_limits<double>::infinity();
  } else {
    rep.error_bar = std::numeric_limits<double>::infinity();
  }
  rep.notes = notes.str();
  return rep;
}

}  // namespace finsler
