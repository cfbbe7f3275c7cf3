#include "finsler/busemann.hpp"

#include "finsler/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <mutex>
#include <numbers>
#include <sstream>

namespace finsler {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double slack(const DistanceResult& d) { return std::max(d.error_estimate, kDistanceTolerance); }

Vec unit_euclidean(const Vec& v) { return v / v.norm(); }

Vec point_independent_base(const FinslerStructure& F) {
  Vec x = Vec::Zero(F.dimension());
  if (!F.chart().contains(x)) {
    Rng rng(1);
    x = sample_chart_point(F.chart(), rng);
  }
  return x;
}

}  // namespace

double truncated_busemann(const Ray& eta, double t, const Vec& x, const DistanceOptions& options) {
  if (!(t >= 0.0)) throw FinslerError(ErrorCode::invalid_argument, "truncation parameter must be nonnegative");
  return distance(eta.structure(), x, eta.point(t), options).value - t;
}

ScalarField truncated_busemann_field(const Ray& eta, double t, const DistanceOptions& options) {
  const Vec q = eta.point(t);
  const FinslerStructure F = eta.structure();
  ScalarField f;
  f.name = "truncated-busemann";
  f.value = [F, q, t, options](const Vec& x) { return distance(F, x, q, options).value - t; };
  f.differential = [F, q, options](const Vec& x) {
    const DistanceResult d = distance(F, x, q, options);
    if (d.initial_velocity.size() == 0) throw GeometricError("truncated Busemann function is singular at gamma(t)");
    return Vec(-F.model().legendre(x, d.initial_velocity));
  };
  // Central differences of the differential: one solve per stencil point.
  f.hessian = [F, q, options, diff = f.differential](const Vec& x) {
    const auto n = x.size();
    const double h = 1e-3 * std::max(1.0, std::min(x.norm(), (q - x).norm()));
    Mat H(n, n);
    for (Eigen::Index k = 0; k < n; ++k) {
      Vec a = x, b = x;
      a[k] += h;
      b[k] -= h;
      H.col(k) = (diff(a) - diff(b)) / (2.0 * h);
    }
    return Mat(0.5 * (H + H.transpose()));
  };
  return f;
}

BusemannEvaluation busemann(const Ray& eta, const Vec& x, double tol, const BusemannOptions& options) {
  if (!(tol > 0.0)) throw FinslerError(ErrorCode::invalid_argument, "Busemann tolerance must be positive");
  const FinslerStructure& F = eta.structure();
  F.chart().require_contains(x, "Busemann point");
  BusemannEvaluation ev;
  ev.ray_id = eta.id();
  ev.point = x;
  ev.tolerance = tol;

  const DistanceResult base = distance(F, eta.origin(), x, options.distance);
  ev.base_distance = base.value;
  ev.solver_tolerance = slack(base);

  DistanceResult last;
  auto solve = [&](double t) {
    last = distance(F, x, eta.point(t), options.distance);
    ev.solver_tolerance = std::max(ev.solver_tolerance, slack(last));
    ev.steps.push_back({t, last.value - t, last.error_estimate, last.method});
  };

  std::ostringstream diag;
  double t = std::min(std::max(1.0, 2.0 * base.value), options.t_max);
  double decrement = kInf;
  double tail = kInf;
  try {
    solve(t);
    while (true) {
      if (2.0 * t > options.t_max) {
        diag << "t_max " << options.t_max << " reached; ";
        break;
      }
      const double prev = ev.steps.back().value;
      solve(2.0 * t);
      t *= 2.0;
      const double before = decrement;
      decrement = prev - ev.steps.back().value;
      if (-decrement > ev.monotonicity_excess) ev.monotonicity_excess = -decrement;
      if (-decrement > 2.0 * ev.solver_tolerance) ev.monotone = false;
      // Remaining decrease b_2t - b, extrapolated from the ratio of the last
      // two decrements; half-life decay (tail = decrement) before that.
      tail = decrement;
      if (std::isfinite(before) && before > 0.0 && decrement > 0.0) {
        const double r = decrement / before;
        tail = r < 1.0 ? std::max(decrement, decrement * r / (1.0 - r)) : kInf;
      }
      if (decrement <= std::max(2.0 * ev.solver_tolerance, 1e-3 * tol)) tail = std::max(decrement, 0.0);
      if (tail < tol) {
        ev.converged = true;
        break;
      }
    }
  } catch (const FinslerError& e) {
    if (ev.steps.empty()) throw;
    diag << "truncation solve failed: " << e.what() << "; ";
  }
  if (!ev.monotone) diag << "truncations increase by " << ev.monotonicity_excess << "; ";

  const TruncationStep& fin = ev.steps.back();
  ev.t_final = fin.t;
  ev.upper = ev.value = fin.value;
  ev.lower = std::isfinite(tail) ? ev.upper - tail : -ev.base_distance;
  if (last.initial_velocity.size())
    ev.differential = -F.model().legendre(x, last.initial_velocity);
  ev.diagnostics = ev.converged ? "converged" : "not converged: " + diag.str();
  return ev;
}

struct BusemannField::Memo {
  std::mutex mutex;
  std::map<std::vector<double>, BusemannEvaluation> entries;
};

BusemannField::BusemannField(Ray eta, double tol, BusemannOptions options)
    : ray_(std::move(eta)), tol_(tol), options_(std::move(options)), memo_(std::make_shared<Memo>()) {
  if (!(tol > 0.0)) throw FinslerError(ErrorCode::invalid_argument, "Busemann tolerance must be positive");
}

BusemannEvaluation BusemannField::evaluate(const Vec& x) const {
  std::vector<double> key(x.data(), x.data() + x.size());
  {
    std::lock_guard<std::mutex> lock(memo_->mutex);
    const auto it = memo_->entries.find(key);
    if (it != memo_->entries.end()) return it->second;
  }
  BusemannEvaluation ev = busemann(ray_, x, tol_, options_);
  std::lock_guard<std::mutex> lock(memo_->mutex);
  return memo_->entries.emplace(std::move(key), std::move(ev)).first->second;
}

std::vector<BusemannEvaluation> BusemannField::evaluate(const std::vector<Vec>& points, int threads) const {
  std::vector<BusemannEvaluation> out(points.size());
  parallel_for(points.size(), threads, [&](std::size_t i) { out[i] = evaluate(points[i]); });
  return out;
}

ScalarField BusemannField::scalar_field() const {
  ScalarField f;
  f.name = "busemann";
  BusemannField self = *this;
  f.value = [self](const Vec& x) { return self.evaluate(x).value; };
  f.differential = [self](const Vec& x) {
    const BusemannEvaluation ev = self.evaluate(x);
    if (ev.differential.size() == 0) throw GeometricError("Busemann differential unavailable at a ray point");
    return ev.differential;
  };
  return f;
}

std::size_t BusemannField::memo_size() const {
  std::lock_guard<std::mutex> lock(memo_->mutex);
  return memo_->entries.size();
}

double minkowski_closed_form(const FinslerStructure& F, const Vec& v, const Vec& y) {
  if (!F.point_independent())
    throw UnsupportedStructureError("closed-form Busemann function needs a point-independent structure");
  const Vec x0 = point_independent_base(F);
  const double f = F.model().norm(x0, v);
  if (!(f > 0.0)) throw DegenerateDirectionError("ray direction is zero");
  // dF(v) = J(v) / F(v)
  return -F.model().legendre(x0, v).dot(y) / f;
}

ScalarField minkowski_busemann_field(const FinslerStructure& F, const Vec& p, const Vec& v) {
  if (!F.point_independent())
    throw UnsupportedStructureError("closed-form Busemann function needs a point-independent structure");
  const Vec x0 = point_independent_base(F);
  const double f = F.model().norm(x0, v);
  if (!(f > 0.0)) throw DegenerateDirectionError("ray direction is zero");
  const Vec a = -F.model().legendre(x0, v) / f;
  ScalarField out;
  out.name = "minkowski-busemann";
  out.value = [a, p](const Vec& x) { return a.dot(x - p); };
  out.differential = [a](const Vec&) { return a; };
  const auto n = a.size();
  out.hessian = [n](const Vec&) { return Mat::Zero(n, n); };
  return out;
}

AsymptoteReport asymptote(const Ray& eta, const Vec& p, const AsymptoteOptions& options) {
  const FinslerStructure& F = eta.structure();
  F.chart().require_contains(p, "asymptote base point");
  AsymptoteReport out;
  std::ostringstream notes;
  double t = options.t0;
  for (int k = 0; k <= options.max_doublings; ++k, t *= 2.0) {
    DistanceResult d;
    try {
      d = distance(F, p, eta.point(t), options.busemann.distance);
    } catch (const FinslerError& e) {
      notes << "minimizer at t = " << t << " failed: " << e.what() << "; ";
      break;
    }
    const Vec v = d.initial_velocity.size() ? d.initial_velocity : eta.state(t).v;
    out.sequence.steps.push_back({t, v, d.value});
    const auto m = out.sequence.steps.size();
    if (m >= 2) {
      out.sequence.cauchy_gap =
          (unit_euclidean(out.sequence.steps[m - 2].velocity) - unit_euclidean(v)).norm();
      if (out.sequence.cauchy_gap <= options.cauchy_tolerance) {
        out.converged = true;
        break;
      }
    }
  }
  if (!out.converged) {
    notes << "velocity sequence not Cauchy within " << options.cauchy_tolerance << " (gap "
          << out.sequence.cauchy_gap << ")";
    out.notes = notes.str();
    return out;
  }
  const MinimizerStep& last = out.sequence.steps.back();
  out.sequence.limit = last.velocity;
  try {
    const DistanceResult d = distance(F, p, eta.point(1.5 * last.t), options.busemann.distance);
    if (d.initial_velocity.size())
      out.schedule_sensitivity = (unit_euclidean(d.initial_velocity) - unit_euclidean(last.velocity)).norm();
  } catch (const FinslerError& e) {
    notes << "schedule sensitivity unavailable: " << e.what() << "; ";
    out.schedule_sensitivity = kInf;
  }
  out.zeta.emplace(F, p, last.velocity, eta.step());

  BusemannField b(eta, options.busemann_tolerance, options.busemann);
  const BusemannEvaluation at_p = b.evaluate(p);
  out.b_at_p = at_p.value;
  out.differential = at_p.differential;
  std::vector<std::pair<std::string, Vec>> dirs = {{"velocity", out.zeta->direction()}};
  if (out.differential.size() && out.differential.cwiseAbs().maxCoeff() >= kZeroDifferential) {
    out.gradient = F.model().inverse_legendre(p, out.differential);
    dirs.emplace_back("gradient", out.gradient);
    dirs.emplace_back("reverse-gradient", F.model().inverse_legendre(p, -out.differential));
  }
  double best = kInf;
  for (const auto& [name, w] : dirs) {
    CandidateCheck c{name, w, 0.0};
    try {
      for (double s : options.check_s) {
        const Vec x = exp_map(F, p, w, s, eta.step());
        c.residual = std::max(c.residual, std::abs(b.value(x) - (out.b_at_p - s)));
      }
    } catch (const FinslerError& e) {
      c.residual = kInf;
      notes << name << " candidate failed: " << e.what() << "; ";
    }
    if (c.residual < best) {
      best = c.residual;
      out.relation = name;
    }
    out.candidates.push_back(std::move(c));
  }
  out.notes = notes.str();
  return out;
}

AsymptoteRelationReport verify_asymptote_relation(const BusemannField& eta, const BusemannField& zeta,
                                                  const std::vector<double>& s_list, const std::vector<Vec>& x_list,
                                                  int threads) {
  AsymptoteRelationReport out;
  const Vec& p = zeta.ray().origin();
  out.b_at_p = eta.value(p);
  out.tolerance = eta.tolerance() + zeta.tolerance();
  out.s = s_list;
  std::vector<Vec> ray_points;
  for (double s : s_list) ray_points.push_back(zeta.ray().point(s));
  const auto on_ray = eta.evaluate(ray_points, threads);
  for (std::size_t i = 0; i < s_list.size(); ++i) {
    const double r = std::abs(on_ray[i].value - (out.b_at_p - s_list[i]));
    out.ray_residuals.push_back(r);
    out.max_ray_residual = std::max(out.max_ray_residual, r);
  }
  const auto be = eta.evaluate(x_list, threads);
  const auto bz = zeta.evaluate(x_list, threads);
  double lo = kInf, hi = -kInf;
  out.max_inequality_excess = -kInf;
  for (std::size_t i = 0; i < x_list.size(); ++i) {
    out.max_inequality_excess = std::max(out.max_inequality_excess, be[i].value - bz[i].value - out.b_at_p);
    lo = std::min(lo, bz[i].value - be[i].value);
    hi = std::max(hi, bz[i].value - be[i].value);
  }
  if (!x_list.empty()) out.difference_spread = hi - lo;
  return out;
}

GradientFieldReport busemann_gradient_field(const BusemannField& b, const Grid& grid, int threads) {
  const FinslerStructure& F = b.ray().structure();
  GradientFieldReport out;
  out.points = grid.points();
  const auto n = out.points.size();
  out.differentials.resize(n);
  out.gradients.resize(n);
  out.forward_norm.resize(n);
  out.unit_norm.resize(n);
  parallel_for(n, threads, [&](std::size_t i) {
    const Vec& x = out.points[i];
    const BusemannEvaluation ev = b.evaluate(x);
    if (ev.differential.size() == 0) throw GeometricError("Busemann differential unavailable at a grid point");
    out.differentials[i] = ev.differential;
    out.gradients[i] = F.model().inverse_legendre(x, ev.differential);
    out.forward_norm[i] = F.model().norm(x, out.gradients[i]);
    out.unit_norm[i] = F.model().dual_norm(x, -ev.differential);
  });
  for (std::size_t i = 0; i < n; ++i) {
    out.max_forward_deviation = std::max(out.max_forward_deviation, std::abs(out.forward_norm[i] - 1.0));
    out.max_unit_deviation = std::max(out.max_unit_deviation, std::abs(out.unit_norm[i] - 1.0));
  }
  return out;
}

LipschitzReport lipschitz_check(const BusemannField& b, const std::vector<std::pair<Vec, Vec>>& pairs, int threads) {
  const FinslerStructure& F = b.ray().structure();
  LipschitzReport out;
  out.pairs = static_cast<int>(pairs.size());
  std::vector<double> excess(pairs.size()), swapped(pairs.size());
  parallel_for(pairs.size(), threads, [&](std::size_t i) {
    const auto& [x, y] = pairs[i];
    const BusemannEvaluation bx = b.evaluate(x);
    const BusemannEvaluation by = b.evaluate(y);
    const DistanceResult dxy = distance(F, x, y, b.options().distance);
    const DistanceResult dyx = distance(F, y, x, b.options().distance);
    const double tol = bx.bracket_width() + by.bracket_width() + bx.solver_tolerance + by.solver_tolerance +
                       slack(dxy) + slack(dyx);
    const double diff = by.value - bx.value;
    excess[i] = std::max(-dxy.value - diff, diff - dyx.value) - tol;
    swapped[i] = std::max(-dyx.value - diff, diff - dxy.value) - tol;
  });
  out.worst_excess = out.swapped_worst_excess = pairs.empty() ? 0.0 : -kInf;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    out.worst_excess = std::max(out.worst_excess, excess[i]);
    out.swapped_worst_excess = std::max(out.swapped_worst_excess, swapped[i]);
    out.violations += excess[i] > 0.0;
    out.swapped_violations += swapped[i] > 0.0;
  }
  return out;
}

Horosphere horosphere_extract(const BusemannField& b, double c, const Grid& grid, double band, int threads) {
  const FinslerStructure& F = b.ray().structure();
  Horosphere out;
  out.ray_id = b.ray().id();
  out.level = c;
  out.band = band > 0.0 ? band : 10.0 * b.tolerance();
  out.grid = grid;
  const std::vector<Vec> points = grid.points();
  const auto evals = b.evaluate(points, threads);
  const auto n = grid.box.lower.size();
  Vec spacing(n);
  for (Eigen::Index i = 0; i < n; ++i)
    spacing[i] = (grid.box.upper[i] - grid.box.lower[i]) / (grid.resolution[static_cast<std::size_t>(i)] - 1);

  std::vector<std::optional<Vec>> refined(points.size());
  parallel_for(points.size(), threads, [&](std::size_t i) {
    const BusemannEvaluation& ev = evals[i];
    if (ev.differential.size() == 0) return;
    const double gap = ev.value - c;
    if (std::abs(gap) > 0.5 * ev.differential.cwiseAbs().dot(spacing) + out.band) return;
    const Vec& x = points[i];
    const Vec grad = F.model().inverse_legendre(x, ev.differential);
    // db(grad b) = F*(db)^2
    const Vec x1 = x - gap / ev.differential.dot(grad) * grad;
    if (!F.chart().contains(x1)) return;
    const double g1 = b.value(x1) - c;
    if (std::abs(g1) <= out.band) {
      refined[i] = x1;
      return;
    }
    if (gap == g1) return;
    const Vec x2 = x + (x1 - x) * (gap / (gap - g1));
    if (F.chart().contains(x2) && std::abs(b.value(x2) - c) <= out.band) refined[i] = x2;
  });
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (!refined[i]) continue;
    const BusemannEvaluation ev = b.evaluate(*refined[i]);
    out.samples.push_back(*refined[i]);
    out.values.push_back(ev.value);
    out.max_level_error = std::max(out.max_level_error, std::abs(ev.value - c));
    if (ev.differential.size())
      out.max_unit_deviation =
          std::max(out.max_unit_deviation, std::abs(F.model().dual_norm(*refined[i], -ev.differential) - 1.0));
  }
  if (out.samples.empty()) {
    double lo = kInf, hi = -kInf;
    for (const auto& ev : evals) {
      lo = std::min(lo, ev.value);
      hi = std::max(hi, ev.value);
    }
    std::ostringstream s;
    s << "level " << c << " out of range: b spans [" << lo << ", " << hi << "] on the grid";
    out.notes = s.str();
  }
  return out;
}

SumReport forward_backward_sum(const FinslerStructure& F, const Vec& p, const Vec& v, const std::vector<Vec>& x_list,
                               double tol, const BusemannOptions& options, int threads) {
  const BusemannField fwd(Ray(F, p, v, options.distance.step), tol, options);
  const BusemannField bwd(Ray(reverse_structure(F), p, -v, options.distance.step), tol, options);
  const auto a = fwd.evaluate(x_list, threads);
  const auto b = bwd.evaluate(x_list, threads);
  SumReport out;
  out.min_sum = x_list.empty() ? 0.0 : kInf;
  for (std::size_t i = 0; i < x_list.size(); ++i) {
    const double s = a[i].value + b[i].value;
    out.sums.push_back(s);
    out.max_abs = std::max(out.max_abs, std::abs(s));
    out.min_sum = std::min(out.min_sum, s);
  }
  return out;
}

BusemannLaplacian busemann_laplacian(const Ray& eta, const VolumeForm& mu, const Vec& x, double tol,
                                     const BusemannOptions& options) {
  const FinslerStructure& F = eta.structure();
  BusemannLaplacian out;
  const double d0 = distance(F, eta.origin(), x, options.distance).value;
  double t = std::min(std::max(1.0, 2.0 * d0), options.t_max);
  double extrapolated = 0.0;
  while (true) {
    double value;
    try {
      value = shen_laplacian(F, mu, truncated_busemann_field(eta, t, options.distance), x).value;
    } catch (const FinslerError& e) {
      if (out.history.empty()) throw;
      out.notes = "truncation at t = " + std::to_string(t) + " failed: " + e.what();
      break;
    }
    out.history.emplace_back(t, value);
    out.t = t;
    out.last_truncation = value;
    const auto m = out.history.size();
    if (m >= 2) {
      const double prev = out.history[m - 2].second;
      const double diff = std::abs(value - prev);
      bool settled = diff < tol;
      if (!settled && m >= 3) {
        // Geometric tail when the differences shrink much faster than 1/t.
        const double r = diff / std::abs(prev - out.history[m - 3].second);
        settled = r < 0.25 && diff * r / (1.0 - r) < 0.5 * tol;
      }
      if (settled) {
        out.value = value;
        out.converged = true;
        break;
      }
      // Richardson step removing a 1/t term of Delta b_t.
      const double next = 2.0 * value - prev;
      if (m >= 3 && std::abs(next - extrapolated) < tol) {
        out.value = next;
        out.converged = true;
        break;
      }
      extrapolated = next;
    }
    out.value = value;
    if (2.0 * t > options.t_max) break;
    t *= 2.0;
  }
  return out;
}

AhfReport ahf_diagnose(const FinslerStructure& F, const VolumeForm& mu, const std::vector<Ray>& rays,
                       const std::vector<Vec>& points, const AhfOptions& options) {
  if (rays.empty() || points.empty()) throw FinslerError(ErrorCode::invalid_argument, "AHF check needs rays and points");
  AhfReport out;
  out.structure_id = F.id();
  out.volume = mu.kind();
  out.points = points;
  out.threshold = options.threshold;
  out.weak_tolerance = options.weak_tolerance;
  for (const Ray& r : rays) out.rays.push_back(r.id());
  const std::size_t np = points.size();
  out.samples.assign(rays.size(), std::vector<BusemannLaplacian>(np));
  parallel_for(rays.size() * np, options.threads, [&](std::size_t i) {
    out.samples[i / np][i % np] =
        busemann_laplacian(rays[i / np], mu, points[i % np], options.laplacian_tolerance, options.busemann);
  });
  double lo = kInf, hi = -kInf, sum = 0.0;
  bool all_converged = true;
  for (const auto& row : out.samples)
    for (const auto& s : row) {
      lo = std::min(lo, s.value);
      hi = std::max(hi, s.value);
      sum += s.value;
      all_converged = all_converged && s.converged;
    }
  out.h = sum / static_cast<double>(rays.size() * np);
  out.spread = hi - lo;

  Box domain;
  if (options.weak_domain) {
    domain = *options.weak_domain;
  } else {
    domain.lower = domain.upper = points.front();
    for (const Vec& x : points) {
      domain.lower = domain.lower.cwiseMin(x);
      domain.upper = domain.upper.cwiseMax(x);
    }
    for (Eigen::Index i = 0; i < domain.lower.size(); ++i)
      if (domain.upper[i] - domain.lower[i] < 0.2) {
        domain.lower[i] -= 0.1;
        domain.upper[i] += 0.1;
      }
  }
  const auto weak_rays = std::min<std::size_t>(rays.size(), static_cast<std::size_t>(std::max(0, options.weak_rays)));
  for (std::size_t r = 0; r < weak_rays; ++r) {
    double t = 0.0, settled = 0.0;
    for (const auto& s : out.samples[r]) {
      t = std::max(t, s.t);
      const auto m = s.history.size();
      if (m >= 2) settled = std::max(settled, std::abs(s.history[m - 1].second - s.history[m - 2].second));
    }
    const ScalarField b = truncated_busemann_field(rays[r], t, options.busemann.distance);
    if (settled < 0.1 * options.weak_tolerance) {
      const auto weak = weak_laplacian_residual(F, mu, b, out.h, domain, options.weak_nodes);
      out.weak_residual = std::max(out.weak_residual, weak.max_residual);
      continue;
    }
    // Truncations still drift like 1/t: extrapolate the pairings as the samples were.
    const ScalarField half = truncated_busemann_field(rays[r], 0.5 * t, options.busemann.distance);
    for (int j = 0; j < 5; ++j) {
      const Bump phi = nested_bump(domain, j);
      const double pairing = 2.0 * weak_laplacian_pairing(F, mu, b, phi, options.weak_nodes) -
                             weak_laplacian_pairing(F, mu, half, phi, options.weak_nodes);
      const double residual = std::abs(out.h * bump_mass(mu, phi, options.weak_nodes) - pairing);
      out.weak_residual = std::max(out.weak_residual, residual);
    }
  }
  out.consistent = out.spread <= options.threshold && out.weak_residual <= options.weak_tolerance;
  out.verdict = out.consistent ? "AHF-consistent" : "not AHF-consistent";
  if (!all_converged) out.verdict += " (some Laplacian truncations did not settle)";
  return out;
}

DistanceFunctionReport distance_function_vs_busemann(const FinslerStructure& F, const ScalarField& f, const Vec& p,
                                                     const std::vector<Vec>& x_list, double tol,
                                                     const BusemannOptions& options, int threads) {
  DistanceFunctionReport out;
  out.f_at_p = f.value(p);
  const Vec df = f.differential_at(p);
  const Vec grad = F.model().inverse_legendre(p, df);
  out.gradient_norm_at_p = F.model().norm(p, grad);
  const BusemannField bbar(Ray(reverse_structure(F), p, -grad, options.distance.step), tol, options);
  const auto evals = bbar.evaluate(x_list, threads);
  for (std::size_t i = 0; i < x_list.size(); ++i) {
    const double dev = std::abs(f.value(x_list[i]) - evals[i].value);
    out.deviations.push_back(dev);
    out.max_deviation = std::max(out.max_deviation, dev);
  }
  return out;
}

TotalBoundReport total_busemann_bound(const FinslerStructure& F, const Vec& p, const std::vector<Vec>& directions,
                                      const std::vector<Vec>& omega, const std::vector<Vec>& sequence,
                                      const Vec& sequence_limit, double tol, const BusemannOptions& options) {
  auto field = [&](const Vec& y) -> std::function<double(const Vec&)> {
    if (F.point_independent()) {
      ScalarField s = minkowski_busemann_field(F, p, y);
      return s.value;
    }
    BusemannField b(Ray(F, p, y, options.distance.step), tol, options);
    return [b](const Vec& x) { return b.value(x); };
  };
  TotalBoundReport out;
  out.sup = -kInf;
  out.inf = kInf;
  out.worst_excess = -kInf;
  std::vector<double> dpx(omega.size()), dxp(omega.size()), err(omega.size());
  for (std::size_t k = 0; k < omega.size(); ++k) {
    const DistanceResult a = distance(F, p, omega[k], options.distance);
    const DistanceResult b = distance(F, omega[k], p, options.distance);
    dpx[k] = a.value;
    dxp[k] = b.value;
    err[k] = slack(a) + slack(b) + (F.point_independent() ? 0.0 : tol);
  }
  for (const Vec& y : directions) {
    const auto b = field(y);
    for (std::size_t k = 0; k < omega.size(); ++k) {
      const double v = b(omega[k]);
      out.sup = std::max(out.sup, v);
      out.inf = std::min(out.inf, v);
      const double excess = std::max(-dpx[k] - v, v - dxp[k]) - err[k];
      out.worst_excess = std::max(out.worst_excess, excess);
      out.violations += excess > 0.0;
      ++out.samples;
    }
  }
  if (!sequence.empty()) {
    const auto limit = field(sequence_limit);
    std::vector<double> base(omega.size());
    for (std::size_t k = 0; k < omega.size(); ++k) base[k] = limit(omega[k]);
    for (const Vec& y : sequence) {
      const auto b = field(y);
      double gap = 0.0;
      for (std::size_t k = 0; k < omega.size(); ++k) gap = std::max(gap, std::abs(b(omega[k]) - base[k]));
      out.sequence_gaps.push_back(gap);
    }
  }
  return out;
}

double level_set_distance(const FinslerStructure& F, const ScalarField& u, const Vec& x, double level) {
  if (!F.point_independent())
    throw UnsupportedStructureError("level-set distance assumes straight geodesics");
  const auto n = x.size();
  const double u0 = u.value(x) - level;
  if (u0 == 0.0) return 0.0;
  // Length of the straight segment from x along w to the level set, or inf.
  auto reach = [&](const Vec& w) {
    double lo = 0.0, hi = 0.05;
    double ghi = u.value(x + hi * w) - level;
    while ((ghi > 0.0) == (u0 > 0.0)) {
      lo = hi;
      hi *= 2.0;
      if (hi > 1e4 || !F.chart().contains(x + hi * w)) return kInf;
      ghi = u.value(x + hi * w) - level;
    }
    for (int k = 0; k < 80 && hi - lo > 1e-15 * hi; ++k) {
      const double mid = 0.5 * (lo + hi);
      const double g = u.value(x + mid * w) - level;
      ((g > 0.0) == (u0 > 0.0) ? lo : hi) = mid;
    }
    return F.model().norm(x, 0.5 * (lo + hi) * w);
  };
  if (n == 2) {
    auto at = [&](double th) { return reach(make_vec({std::cos(th), std::sin(th)})); };
    constexpr int kSamples = 720;
    const double step = 2.0 * std::numbers::pi / kSamples;
    double best = kInf, best_th = 0.0;
    for (int k = 0; k < kSamples; ++k) {
      const double v = at(k * step);
      if (v < best) {
        best = v;
        best_th = k * step;
      }
    }
    if (!std::isfinite(best)) throw GeometricError("level set not reached from the point");
    double a = best_th - step, b = best_th + step;
    const double r = 0.5 * (std::sqrt(5.0) - 1.0);
    double c = b - r * (b - a), d = a + r * (b - a);
    double fc = at(c), fd = at(d);
    for (int k = 0; k < 100 && b - a > 1e-12; ++k) {
      if (fc < fd) {
        b = d;
        d = c;
        fd = fc;
        c = b - r * (b - a);
        fc = at(c);
      } else {
        a = c;
        c = d;
        fc = fd;
        d = a + r * (b - a);
        fd = at(d);
      }
    }
    return std::min(best, std::min(fc, fd));
  }
  Rng rng(7);
  double best = kInf;
  Vec best_w;
  for (int k = 0; k < 4000; ++k) {
    const Vec w = rng.direction(static_cast<int>(n));
    const double v = reach(w);
    if (v < best) {
      best = v;
      best_w = w;
    }
  }
  if (!std::isfinite(best)) throw GeometricError("level set not reached from the point");
  for (double radius = 0.05; radius > 1e-7; radius *= 0.5) {
    for (int k = 0; k < 40; ++k) {
      Vec w = best_w + radius * rng.direction(static_cast<int>(n));
      w /= w.norm();
      const double v = reach(w);
      if (v < best) {
        best = v;
        best_w = w;
      }
    }
  }
  return best;
}

std::vector<double> distributional_gaps(const Ray& eta, const VolumeForm& mu, const ScalarField& limit,
                                        const Bump& phi, const std::vector<double>& t_list, int nodes) {
  const FinslerStructure& F = eta.structure();
  const double target = weak_laplacian_pairing(F, mu, limit, phi, nodes);
  std::vector<double> out;
  for (double t : t_list) {
    const ScalarField b = truncated_busemann_field(eta, t);
    out.push_back(std::abs(weak_laplacian_pairing(F, mu, b, phi, nodes) - target));
  }
  return out;
}

std::vector<double> uniform_gaps(const Ray& eta, const ScalarField& limit, const std::vector<Vec>& points,
                                 const std::vector<double>& t_list) {
  std::vector<double> out;
  for (double t : t_list) {
    double gap = 0.0;
    for (const Vec& x : points) gap = std::max(gap, std::abs(truncated_busemann(eta, t, x) - limit.value(x)));
    out.push_back(gap);
  }
  return out;
}

}  // namespace finsler
