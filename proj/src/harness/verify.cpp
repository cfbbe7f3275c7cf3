#include "context.hpp"

#include "finsler/fields.hpp"
#include "finsler/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <set>
#include <sstream>

namespace finsler::harness {

namespace {

Vec draw(Rng& rng, const Box& box) {
  Vec x(box.lower.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) x[i] = rng.uniform(box.lower[i], box.upper[i]);
  return x;
}

std::vector<Vec> draw_points(std::uint64_t seed, const Box& box, int count) {
  Rng rng(seed);
  std::vector<Vec> out;
  for (int k = 0; k < count; ++k) out.push_back(draw(rng, box));
  return out;
}

/// Runs `body`; an exception becomes a failed row named `name`.
void guarded(Context& ctx, const std::string& name, const std::string& statement, const std::function<void()>& body) {
  try {
    body();
  } catch (const std::exception& e) {
    ctx.checks.push_back(failed_check(name, statement, e.what()));
  }
}

double solver_slack(const DistanceResult& d) { return std::max(d.error_estimate, kDistanceTolerance); }

// -- metric --------------------------------------------------------------

void metric_suite(Context& ctx) {
  const FinslerStructure& F = ctx.F;
  const int n = ctx.dimension();
  const int samples = ctx.config.integer("verify", "samples", 200);
  Rng rng(ctx.seed);
  struct Sample {
    Vec x, y, u;
    double lambda;
  };
  std::vector<Sample> s;
  for (int k = 0; k < samples; ++k) {
    Sample a;
    a.x = sample_chart_point(F.chart(), rng);
    a.y = rng.direction(n) * rng.uniform(0.1, 3.0);
    a.u = rng.direction(n) * rng.uniform(0.1, 3.0);
    a.lambda = 10.0 * (1.0 - rng.uniform());  // (0, 10]
    s.push_back(a);
  }

  guarded(ctx, "metric.homogeneity", "F(x, l y) = l F(x, y) for l > 0", [&] {
    double worst = 0.0;
    for (const auto& a : s) {
      const double Fy = F.norm(a.x, a.y);
      worst = std::max(worst, std::abs(F.norm(a.x, a.lambda * a.y) - a.lambda * Fy) / (a.lambda * Fy));
    }
    ctx.checks.push_back(upper_check("metric.homogeneity", "F(x, l y) = l F(x, y) for l > 0", worst, 1e-9));
  });
  guarded(ctx, "metric.positive_definite", "the fundamental tensor is positive definite", [&] {
    double least = std::numeric_limits<double>::infinity();
    for (const auto& a : s) {
      Eigen::SelfAdjointEigenSolver<Mat> eig(fundamental_tensor(F, {a.x, a.y}).matrix);
      least = std::min(least, eig.eigenvalues().minCoeff());
    }
    ctx.checks.push_back(lower_check("metric.positive_definite", "the fundamental tensor is positive definite",
                                     least, 0.0));
  });
  guarded(ctx, "metric.euler_identity", "g_ij(x, y) y^i y^j = F(x, y)^2", [&] {
    double worst = 0.0;
    for (const auto& a : s) {
      const Mat g = fundamental_tensor(F, {a.x, a.y}).matrix;
      const double F2 = std::pow(F.norm(a.x, a.y), 2);
      worst = std::max(worst, std::abs(a.y.dot(g * a.y) - F2) / F2);
    }
    ctx.checks.push_back(upper_check("metric.euler_identity", "g_ij(x, y) y^i y^j = F(x, y)^2", worst, 1e-8));
  });
  guarded(ctx, "metric.legendre_round_trip", "the inverse Legendre map undoes the Legendre map", [&] {
    // The forward error is bounded by cond(g) times the error of J, so
    // near-degenerate directions (cond > 1e5) only enter the residual check.
    double worst = 0.0, backward = 0.0, dual = 0.0;
    int skipped = 0;
    for (const auto& a : s) {
      const Covector J = legendre(F, {a.x, a.y});
      const Vec back = inverse_legendre(F, J).components;
      backward = std::max(backward, (legendre(F, {a.x, back}).components - J.components).norm() / J.components.norm());
      Eigen::SelfAdjointEigenSolver<Mat> eig(fundamental_tensor(F, {a.x, a.y}).matrix);
      if (eig.eigenvalues().maxCoeff() > 1e5 * eig.eigenvalues().minCoeff()) {
        ++skipped;
      } else {
        worst = std::max(worst, (back - a.y).norm() / a.y.norm());
      }
      const double Fy = F.norm(a.x, a.y);
      dual = std::max(dual, std::abs(dual_norm(F, J) - Fy) / Fy);
    }
    ctx.checks.push_back(upper_check("metric.legendre_round_trip", "the inverse Legendre map undoes the Legendre map",
                                     worst, 1e-8,
                                     std::to_string(skipped) + " ill-conditioned samples in the residual check only"));
    ctx.checks.push_back(upper_check("metric.legendre_residual", "J(J*(a)) = a", backward, 1e-8));
    ctx.checks.push_back(upper_check("metric.dual_norm", "the dual norm of J(y) equals F(y)", dual, 1e-8));
  });
  guarded(ctx, "metric.gradient_duality", "df(v) = g_grad f(grad f, v)", [&] {
    const std::vector<ScalarField> fs = {fields::half_square(n), fields::linear(Vec::LinSpaced(n, 1.0, 0.5))};
    double worst = 0.0;
    for (const auto& f : fs)
      for (const auto& a : s) {
        const Vec df = f.differential_at(a.x);
        if (df.lpNorm<Eigen::Infinity>() < kZeroDifferential) continue;
        const Vec g = gradient(f, F, a.x).components;
        const Mat G = fundamental_tensor(F, {a.x, g}).matrix;
        worst = std::max(worst, std::abs(df.dot(a.u) - g.dot(G * a.u)));
      }
    ctx.checks.push_back(upper_check("metric.gradient_duality", "df(v) = g_grad f(grad f, v)", worst, 1e-6));
  });
  guarded(ctx, "metric.triangle", "F(x, u + v) <= F(x, u) + F(x, v)", [&] {
    double worst = -std::numeric_limits<double>::infinity();
    for (const auto& a : s) {
      const double sum = F.norm(a.x, a.y) + F.norm(a.x, a.u);
      worst = std::max(worst, (F.norm(a.x, a.y + a.u) - sum) / sum);
    }
    ctx.checks.push_back(upper_check("metric.triangle", "F(x, u + v) <= F(x, u) + F(x, v)", worst, 1e-12));
  });
}

// -- geodesic ------------------------------------------------------------

void geodesic_suite(Context& ctx) {
  const FinslerStructure& F = ctx.F;
  const int n = ctx.dimension();
  const Box box = build_grid(ctx.config, n).box;

  guarded(ctx, "geodesic.speed_conservation", "unit speed is conserved along integrated geodesics", [&] {
    const int count = ctx.config.integer("verify", "geodesics", 3);
    const double length = ctx.config.number("verify", "geodesic_length", 50.0);
    Rng rng(ctx.seed + 1);
    std::vector<double> drift(static_cast<std::size_t>(count));
    std::vector<std::pair<Vec, Vec>> starts;
    for (int k = 0; k < count; ++k) starts.emplace_back(draw(rng, box), rng.direction(n));
    parallel_for(starts.size(), ctx.threads, [&](std::size_t k) {
      drift[k] = integrate_geodesic(F, starts[k].first, starts[k].second, length, kDefaultStep, 1000).speed_drift;
    });
    ctx.checks.push_back(upper_check("geodesic.speed_conservation",
                                     "unit speed is conserved along integrated geodesics",
                                     *std::max_element(drift.begin(), drift.end()), kDefaultSpeedDrift,
                                     std::to_string(count) + " geodesics of length " + fmt(length)));
  });

  guarded(ctx, "geodesic.triangle", "d(p, r) <= d(p, q) + d(q, r) up to solver error", [&] {
    const int count = ctx.config.integer("verify", "triples", 100);
    const auto pts = draw_points(ctx.seed + 2, box, 3 * count);
    std::vector<double> excess(static_cast<std::size_t>(count));
    parallel_for(excess.size(), ctx.threads, [&](std::size_t k) {
      const auto a = distance(F, pts[3 * k], pts[3 * k + 2], ctx.distance);
      const auto b = distance(F, pts[3 * k], pts[3 * k + 1], ctx.distance);
      const auto c = distance(F, pts[3 * k + 1], pts[3 * k + 2], ctx.distance);
      excess[k] = a.value - b.value - c.value - 2.0 * (solver_slack(a) + solver_slack(b) + solver_slack(c));
    });
    ctx.checks.push_back(upper_check("geodesic.triangle", "d(p, r) <= d(p, q) + d(q, r) up to solver error",
                                     *std::max_element(excess.begin(), excess.end()), 0.0,
                                     std::to_string(count) + " triples"));
  });

  if (F.point_independent()) {
    guarded(ctx, "geodesic.translation_invariance", "shooting distance equals F(q - p)", [&] {
      const int count = ctx.config.integer("verify", "pairs", 100);
      const auto pts = draw_points(ctx.seed + 3, box, 2 * count);
      DistanceOptions shoot = ctx.distance;
      shoot.closed_form = false;
      shoot.cache = nullptr;
      std::vector<double> err(static_cast<std::size_t>(count)), asym(err.size());
      parallel_for(err.size(), ctx.threads, [&](std::size_t k) {
        const Vec& p = pts[2 * k];
        const Vec& q = pts[2 * k + 1];
        const double pq = distance(F, p, q, shoot).value;
        const double qp = distance(F, q, p, shoot).value;
        const double fpq = F.norm(p, q - p), fqp = F.norm(p, p - q);
        err[k] = std::max(std::abs(pq - fpq), std::abs(qp - fqp));
        asym[k] = std::abs((pq - qp) - (fpq - fqp));
      });
      ctx.checks.push_back(upper_check("geodesic.translation_invariance", "shooting distance equals F(q - p)",
                                       *std::max_element(err.begin(), err.end()), 1e-6));
      ctx.checks.push_back(upper_check("geodesic.nonsymmetry", "d(p, q) - d(q, p) = F(q - p) - F(p - q)",
                                       *std::max_element(asym.begin(), asym.end()), 1e-6));
    });
  }

  if (ctx.config.has_section("ray")) {
    guarded(ctx, "geodesic.ray_minimality", "d(gamma(s), gamma(t)) = t - s along the configured ray", [&] {
      const Ray eta = build_ray(ctx);
      const double t_check = ctx.config.number("verify", "ray_check", 25.0);
      const RayCheck rc = make_ray(F, eta.origin(), eta.direction(), t_check, ctx.distance);
      ctx.checks.push_back(upper_check("geodesic.ray_minimality",
                                       "d(gamma(s), gamma(t)) = t - s along the configured ray", rc.worst_violation,
                                       1e-6, std::to_string(rc.pairs_checked) + " pairs up to t = " + fmt(t_check)));
    });
  }

  if (n <= 3) {
    guarded(ctx, "geodesic.lattice_upper_bound", "the lattice length bounds the refined distance from above", [&] {
      const auto pts = draw_points(ctx.seed + 4, box, 6);
      double worst = -std::numeric_limits<double>::infinity();
      for (int k = 0; k < 3; ++k) {
        const Vec& p = pts[static_cast<std::size_t>(2 * k)];
        const Vec& q = pts[static_cast<std::size_t>(2 * k + 1)];
        const double refined = distance(F, p, q, ctx.distance).value;
        const double lattice = lattice_distance(F, p, q).length;
        worst = std::max(worst, refined - lattice - 1e-6);
      }
      ctx.checks.push_back(upper_check("geodesic.lattice_upper_bound",
                                       "the lattice length bounds the refined distance from above", worst, 0.0));
    });
  }
}

// -- laplacian -----------------------------------------------------------

void laplacian_suite(Context& ctx) {
  const FinslerStructure& F = ctx.F;
  const int n = ctx.dimension();
  const Box box = build_grid(ctx.config, n).box;
  const VolumeForm mu(F, ctx.volume);
  const auto pts = draw_points(ctx.seed + 5, box, 10);

  guarded(ctx, "laplacian.density_positive", "the volume density is positive", [&] {
    double least = std::numeric_limits<double>::infinity();
    for (const Vec& x : pts) least = std::min(least, mu.density(x));
    ctx.checks.push_back(lower_check("laplacian.density_positive", "the volume density is positive", least, 0.0));
  });

  guarded(ctx, "laplacian.mean_curvature", "Delta r equals the mean curvature of the level set of r", [&] {
    const Vec center = box.center();
    std::vector<Vec> xs;
    for (const Vec& x : pts)
      if ((x - center).norm() > 0.2 * box.half_width().minCoeff() && xs.size() < 3) xs.push_back(x);
    const ScalarField r = fields::distance_from(F, center, ctx.distance);
    std::vector<double> gap(xs.size());
    parallel_for(xs.size(), ctx.threads,
                 [&](std::size_t k) { gap[k] = level_set_mean_curvature(F, mu, r, xs[k]).gap; });
    ctx.checks.push_back(upper_check("laplacian.mean_curvature",
                                     "Delta r equals the mean curvature of the level set of r",
                                     *std::max_element(gap.begin(), gap.end()), 1e-4));
  });

  guarded(ctx, "laplacian.weak_strong", "the strong Laplacian agrees with the weak pairing", [&] {
    const std::vector<ScalarField> fs = {fields::half_square(n), fields::coordinate(n, 0)};
    Box domain = box;
    if (ctx.config.has("verify", "weak_lower")) {
      domain.lower = ctx.config.vector("verify", "weak_lower", n);
      domain.upper = ctx.config.vector("verify", "weak_upper", n);
    }
    const Bump phi = nested_bump(domain, 0);
    double worst = 0.0;
    for (const auto& f : fs) worst = std::max(worst, weak_strong_gap(F, mu, f, phi));
    ctx.checks.push_back(
        upper_check("laplacian.weak_strong", "the strong Laplacian agrees with the weak pairing", worst, 1e-5));
  });

  if (F.family() == Family::euclidean) {
    guarded(ctx, "laplacian.euclidean_identities", "Delta |x|^2 / 2 = n and Delta |x| = (n - 1) / |x|", [&] {
      double sq = 0.0, rad = 0.0, sigma = 0.0;
      const ScalarField h = fields::half_square(n);
      const ScalarField r = fields::euclidean_radius(Vec::Zero(n));
      for (const Vec& x : pts) {
        sq = std::max(sq, std::abs(shen_laplacian(F, mu, h, x).value - n));
        if (x.norm() > 1e-3) rad = std::max(rad, std::abs(shen_laplacian(F, mu, r, x).value - (n - 1) / x.norm()));
        sigma = std::max(sigma, std::abs(mu.density(x) - 1.0));
      }
      ctx.checks.push_back(upper_check("laplacian.half_square", "Delta |x|^2 / 2 = n", sq, 1e-5));
      ctx.checks.push_back(upper_check("laplacian.radius", "Delta |x| = (n - 1) / |x|", rad, 1e-5));
      ctx.checks.push_back(upper_check("laplacian.euclidean_density", "the density is 1", sigma, 1e-12));
    });
  }

  if (F.point_independent() && ctx.config.has_section("ray")) {
    guarded(ctx, "laplacian.distributional", "Delta b_t converges to Delta b in the distributional sense", [&] {
      const Ray eta = build_ray(ctx);
      const ScalarField limit = minkowski_busemann_field(F, eta.origin(), eta.direction());
      const auto ts = ctx.config.numbers("verify", "distributional_t", {64, 128, 256, 512, 1024});
      const auto gaps = distributional_gaps(eta, mu, limit, nested_bump(box, 0), ts);
      double increase = -std::numeric_limits<double>::infinity();
      std::string trail;
      for (std::size_t k = 0; k < gaps.size(); ++k) {
        if (k) increase = std::max(increase, gaps[k] - gaps[k - 1]);
        trail += (k ? " " : "") + fmt(gaps[k]);
      }
      ctx.checks.push_back(upper_check("laplacian.distributional_monotone",
                                       "the distributional gap shrinks along t-doubling", increase, 0.0, trail));
      ctx.checks.push_back(upper_check("laplacian.distributional_final",
                                       "the distributional gap at the largest t is small", gaps.back(), 1e-3));
    });
  }
}

// -- busemann ------------------------------------------------------------

void busemann_suite(Context& ctx) {
  const FinslerStructure& F = ctx.F;
  const int n = ctx.dimension();
  const Config& c = ctx.config;
  const Grid grid = build_grid(c, n);
  const Box box = grid.box;
  const Ray eta = build_ray(ctx);
  const int pairs = c.integer("verify", "pairs", 200);

  guarded(ctx, "busemann.field", "truncation checks on the grid", [&] {
    busemann_field_checks(ctx, eta, grid, false, pairs);
  });

  guarded(ctx, "busemann.ray_normalization", "b(gamma(t)) = -t", [&] {
    const BusemannField b(eta, ctx.tol, ctx.busemann);
    double worst = 0.0;
    for (double t : {1.0, 5.0, 25.0}) worst = std::max(worst, std::abs(b.value(eta.point(t)) + t));
    ctx.checks.push_back(upper_check("busemann.ray_normalization", "b(gamma(t)) = -t", worst, ctx.tol,
                                     "t in {1, 5, 25}"));
  });

  if (F.point_independent()) {
    guarded(ctx, "busemann.level_set_parallelism", "level sets of b are parallel: d(b = c, b = c - 1) = 1", [&] {
      const ScalarField bf = minkowski_busemann_field(F, eta.origin(), eta.direction());
      double worst = 0.0;
      for (const Vec& x : draw_points(ctx.seed + 6, box, 5))
        worst = std::max(worst, std::abs(level_set_distance(F, bf, x, bf.value(x) - 1.0) - 1.0));
      ctx.checks.push_back(upper_check("busemann.level_set_parallelism",
                                       "level sets of b are parallel: d(b = c, b = c - 1) = 1", worst, 1e-4));
    });
  }

  guarded(ctx, "busemann.asymptote", "asymptotic rays satisfy b(zeta(s)) = b(p) - s", [&] {
    const Vec p = c.has("verify", "asymptote_point") ? c.vector("verify", "asymptote_point", n) : box.center();
    AsymptoteOptions ao;
    ao.busemann = ctx.busemann;
    ao.cauchy_tolerance = c.number("verify", "cauchy_tolerance", ao.cauchy_tolerance);
    ao.busemann_tolerance = c.number("verify", "asymptote_tolerance", ao.busemann_tolerance);
    const AsymptoteReport a = asymptote(eta, p, ao);
    if (!a.zeta) {
      ctx.checks.push_back(failed_check("busemann.asymptote", "the minimizer velocities converge",
                                        "no limit: " + a.notes));
      return;
    }
    ctx.summary.emplace_back("asymptote_relation", a.relation);
    if (c.has("verify", "asymptote_direction")) {
      const Vec want = c.vector("verify", "asymptote_direction", n).normalized();
      const Vec got = a.zeta->direction().normalized();
      const double angle = std::atan2((got - want.dot(got) * want).norm(), want.dot(got));
      ctx.checks.push_back(upper_check("busemann.asymptote_direction",
                                       "the asymptote points toward the ideal point of the ray", angle, 1e-3));
    }
    const int count = c.integer("verify", "relation_points", 100);
    const BusemannField fe(eta, ao.busemann_tolerance, ctx.busemann);
    const BusemannField fz(*a.zeta, ao.busemann_tolerance, ctx.busemann);
    const auto xs = draw_points(ctx.seed + 7, box, count);
    const AsymptoteRelationReport r = verify_asymptote_relation(fe, fz, {1, 2, 4, 8}, xs, ctx.threads);
    ctx.checks.push_back(upper_check("busemann.asymptote_ray", "b(zeta(s)) = b(p) - s for s in {1, 2, 4, 8}",
                                     r.max_ray_residual, 1e-4));
    ctx.checks.push_back(upper_check("busemann.asymptote_inequality", "b_eta(x) - b_zeta(x) <= b_eta(p)",
                                     r.max_inequality_excess, 1e-4));
    ctx.checks.push_back(upper_check("busemann.asymptote_difference",
                                     "b_zeta - b_eta is constant for asymptotic rays", r.difference_spread, 1e-4));
  });

  guarded(ctx, "busemann.forward_backward_sum", "b_eta + b_etabar >= 0, with equality on flat models", [&] {
    const int count = c.integer("verify", "sum_points", 100);
    const double tol = c.number("verify", "sum_tolerance", 5e-6);
    const auto xs = draw_points(ctx.seed + 8, box, count);
    const SumReport s = forward_backward_sum(F, eta.origin(), eta.direction(), xs, tol, ctx.busemann, ctx.threads);
    ctx.checks.push_back(lower_check("busemann.forward_backward_nonnegative", "b_eta + b_etabar >= 0", s.min_sum,
                                     -4.0 * tol));
    if (F.point_independent())
      ctx.checks.push_back(upper_check("busemann.forward_backward_sum", "b_eta + b_etabar = 0 on flat models",
                                       s.max_abs, 2e-5));
  });

  if (c.has("verify", "distance_function")) {
    guarded(ctx, "busemann.distance_function", "a distance function with the Busemann Laplacian is b_etabar", [&] {
      const std::string kind = c.text("verify", "distance_function");
      const Vec p = c.has("verify", "distance_function_point") ? c.vector("verify", "distance_function_point", n)
                                                               : eta.origin();
      ScalarField f;
      if (kind == "linear") {
        // unit covector, shifted so that f(p) = 0
        Vec a = c.vector("verify", "distance_function_coefficients", n);
        a /= dual_norm(F, {p, a});
        f = fields::linear(a, -a.dot(p));
      } else if (kind == "negative-log-height") {
        const ScalarField g = fields::negative_log_height(n);
        const double g0 = g.value(p);
        f = g;
        f.value = [g, g0](const Vec& x) { return g.value(x) - g0; };
      } else {
        throw ConfigError(c.source() + ": [verify] distance_function: unknown field '" + kind + "'");
      }
      const double tol = c.number("verify", "distance_function_tolerance", 1e-5);
      const auto xs = draw_points(ctx.seed + 9, box, c.integer("verify", "distance_function_points", 25));
      const DistanceFunctionReport r = distance_function_vs_busemann(F, f, p, xs, tol, ctx.busemann, ctx.threads);
      ctx.checks.push_back(upper_check("busemann.distance_function",
                                       "a distance function with the Busemann Laplacian is b_etabar",
                                       r.max_deviation, 1e-4, kind));
    });
  }

  guarded(ctx, "busemann.horosphere", "extracted horosphere samples lie on the level set", [&] {
    const BusemannField b(eta, ctx.tol, ctx.busemann);
    Grid coarse = grid;
    for (auto& r : coarse.resolution) r = std::min(r, c.integer("verify", "horosphere_resolution", 11));
    const double level = c.number("horosphere", "level", b.value(box.center()));
    const Horosphere h = horosphere_extract(b, level, coarse, 0.0, ctx.threads);
    if (h.samples.empty()) {
      ctx.checks.push_back(failed_check("busemann.horosphere", "extracted horosphere samples lie on the level set",
                                        "no samples near level " + fmt(level)));
      return;
    }
    ctx.checks.push_back(upper_check("busemann.horosphere", "extracted horosphere samples lie on the level set",
                                     h.max_level_error, h.band, std::to_string(h.samples.size()) + " samples"));
  });

  if (F.point_independent()) {
    guarded(ctx, "busemann.total_bound", "-d(p, x) <= b(x) <= d(x, p) for rays from p", [&] {
      std::vector<Vec> dirs;
      for (int k = 0; k < 8; ++k) {
        const double th = 2.0 * std::acos(-1.0) * k / 8.0;
        Vec d = Vec::Zero(n);
        d[0] = std::cos(th);
        if (n > 1) d[1] = std::sin(th);
        dirs.push_back(d);
      }
      const Vec p = box.lower - 0.5 * (box.upper - box.lower);
      const TotalBoundReport r = total_busemann_bound(F, p, dirs, draw_points(ctx.seed + 10, box, 50));
      ctx.checks.push_back(upper_check("busemann.total_bound", "-d(p, x) <= b(x) <= d(x, p) for rays from p",
                                       r.worst_excess, 0.0,
                                       "envelope [" + fmt(r.inf) + ", " + fmt(r.sup) + "]"));
    });
  }
}

// -- ahf -----------------------------------------------------------------

void ahf_suite(Context& ctx) {
  const FinslerStructure& F = ctx.F;
  const int n = ctx.dimension();
  const Config& c = ctx.config;
  const VolumeForm mu(F, ctx.volume);
  const Box box = build_grid(c, n).box;

  guarded(ctx, "ahf.harmonicity", "the polar volume density is radial", [&] {
    const Vec base = c.has("harmonic", "base") ? c.vector("harmonic", "base", n) : box.center();
    const auto radii = c.numbers("harmonic", "radii", {0.25, 0.5, 1.0});
    const HarmonicityReport h = harmonicity_check(F, mu, base, radii, c.integer("harmonic", "directions", 16));
    ctx.checks.push_back(upper_check("ahf.harmonicity", "the polar volume density is radial", h.radial_deviation,
                                     h.threshold, "raw deviation " + fmt(h.raw_radial_deviation)));
  });

  if (c.has("ahf", "skip_diagnosis") && c.text("ahf", "skip_diagnosis") == "true") return;

  double h = std::nan("");
  guarded(ctx, "ahf.diagnosis", "Delta b is the same constant for every ray", [&] {
    const auto rays = ahf_rays(ctx);
    const auto points = sample_points(ctx, "ahf");
    const AhfOptions o = ahf_options(ctx);
    const AhfReport r = ahf_diagnose(F, mu, rays, points, o);
    h = r.h;
    ctx.summary.emplace_back("ahf_h", fmt(r.h));
    ctx.summary.emplace_back("ahf_verdict", r.verdict);
    ctx.checks.push_back(upper_check("ahf.spread", "Delta b is the same constant for every ray and point", r.spread,
                                     o.threshold));
    ctx.checks.push_back(upper_check("ahf.weak_residual", "Delta b = h holds weakly", r.weak_residual,
                                     o.weak_tolerance));
    if (F.point_independent())
      ctx.checks.push_back(upper_check("ahf.flat_h", "h = 0 on flat models", std::abs(r.h), o.threshold));
    if (c.has("ahf", "reference_field")) {
      const ScalarField ref = build_field(ctx, "ahf", "reference_field");
      double mean = 0.0;
      for (const Vec& x : points) mean += shen_laplacian(F, mu, ref, x).value;
      mean /= static_cast<double>(points.size());
      ctx.checks.push_back(upper_check("ahf.reference_h", "h equals the Laplacian of the closed-form Busemann field",
                                       std::abs(r.h - mean), 1e-3, "reference " + fmt(mean)));
    }
  });

  if (c.has("ahf", "horosphere_t") && std::isfinite(h)) {
    guarded(ctx, "ahf.horosphere_limit", "the mean curvature of large spheres tends to h", [&] {
      const Ray eta = build_ray(ctx);
      const HorosphereLimitReport L =
          horosphere_mean_curvature_limit(F, mu, eta.origin(), eta.direction(), c.numbers("ahf", "horosphere_t"));
      ctx.checks.push_back(upper_check("ahf.horosphere_limit", "the mean curvature of large spheres tends to h",
                                       std::abs(L.limit - h), 1e-3, "limit " + fmt(L.limit)));
    });
  }
}

}  // namespace

int cmd_verify(Context& ctx) {
  static const std::vector<std::pair<std::string, void (*)(Context&)>> suites = {
      {"metric", metric_suite},       {"geodesic", geodesic_suite}, {"laplacian", laplacian_suite},
      {"busemann", busemann_suite},   {"ahf", ahf_suite},
  };
  // a suite name, "all", or a comma-separated list of names
  const std::string selector = ctx.argument.empty() ? ctx.config.text("verify", "suite", "all") : ctx.argument;
  std::set<std::string> chosen;
  std::stringstream list(selector);
  for (std::string item; std::getline(list, item, ',');) {
    item.erase(0, item.find_first_not_of(" \t"));
    item.erase(item.find_last_not_of(" \t") + 1);
    bool known = item == "all";
    for (const auto& entry : suites) known = known || entry.first == item;
    if (!known)
      throw ConfigError("unknown verify suite '" + item + "' (metric, geodesic, laplacian, busemann, ahf, all)");
    chosen.insert(item);
  }
  ctx.summary.emplace_back("suite", selector);
  for (const auto& [name, fn] : suites) {
    if (!chosen.count("all") && !chosen.count(name)) continue;
    *ctx.log << "verify: " << name << "\n";
    fn(ctx);
  }
  ctx.write_report("verify.txt", "verify");
  return ctx.all_passed() ? kExitOk : kExitCheckFailed;
}

}  // namespace finsler::harness
