#include "context.hpp"

#include "finsler/fields.hpp"
#include "finsler/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>

namespace finsler::harness {

namespace {

std::vector<std::string> concat(std::vector<std::string> a, const std::vector<std::string>& b) {
  a.insert(a.end(), b.begin(), b.end());
  return a;
}

}  // namespace

std::string Context::output(const std::string& name) {
  if (std::find(outputs.begin(), outputs.end(), name) == outputs.end()) outputs.push_back(name);
  return (std::filesystem::path(out_dir) / name).string();
}

bool Context::all_passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.pass; });
}

void Context::write_report(const std::string& name, const std::string& kind) {
  std::vector<Check> sorted = checks;
  std::stable_sort(sorted.begin(), sorted.end(), [](const Check& a, const Check& b) { return a.name < b.name; });
  const auto failed = std::count_if(sorted.begin(), sorted.end(), [](const Check& c) { return !c.pass; });
  std::vector<std::string> lines;
  lines.push_back(record({{"report", kind},
                          {"structure", F.id()},
                          {"config_digest", config.digest()},
                          {"checks", std::to_string(sorted.size())},
                          {"failed", std::to_string(failed)}}));
  for (const auto& [k, v] : summary) lines.push_back(record({{k, v}}));
  for (const auto& c : sorted) lines.push_back(check_record(c));
  write_lines(output(name), lines);
}

Ray build_ray(const Context& ctx, const std::string& section) {
  const int n = ctx.dimension();
  if (!ctx.config.has_section(section))
    throw ConfigError(ctx.config.source() + ": missing section [" + section + "] (origin, direction)");
  const Vec origin = ctx.config.vector(section, "origin", n);
  const Vec direction = ctx.config.vector(section, "direction", n);
  if (!ctx.F.chart().contains(origin))
    throw ConfigError(ctx.config.source() + ": [" + section + "] origin lies outside the chart");
  if (direction.norm() == 0.0) throw ConfigError(ctx.config.source() + ": [" + section + "] direction is zero");
  return Ray(ctx.F, origin, direction);
}

ScalarField build_field(const Context& ctx, const std::string& section, const std::string& key) {
  const Config& c = ctx.config;
  const int n = ctx.dimension();
  const std::string name = c.text(section, key);
  if (name == "half-square") return fields::half_square(n);
  if (name == "coordinate") {
    const int i = c.integer(section, "index", 1);
    if (i < 1 || i > n) throw ConfigError(c.source() + ": [" + section + "] index out of range");
    return fields::coordinate(n, i - 1);
  }
  if (name == "linear") return fields::linear(c.vector(section, "coefficients", n), c.number(section, "offset", 0.0));
  if (name == "radius") return fields::euclidean_radius(c.vector(section, "center", n));
  if (name == "negative-log-height") return fields::negative_log_height(n);
  if (name == "distance-from") return fields::distance_from(ctx.F, c.vector(section, "center", n), ctx.distance);
  if (name == "busemann") return BusemannField(build_ray(ctx), ctx.tol, ctx.busemann).scalar_field();
  throw ConfigError(c.source() + ": [" + section + "] " + key + ": unknown field '" + name + "'");
}

std::vector<Vec> sample_points(const Context& ctx, const std::string& section) {
  if (ctx.config.has(section, "points")) return ctx.config.vectors(section, "points", ctx.dimension());
  return build_grid(ctx.config, ctx.dimension()).points();
}

int cmd_eval(Context& ctx) {
  const int n = ctx.dimension();
  const Config& c = ctx.config;
  const Grid grid = build_grid(c, n);
  Vec y = Vec::Unit(n, 0);
  if (c.has("eval", "direction")) y = c.vector("eval", "direction", n);
  const bool with_field = c.has("eval", "field");
  std::optional<ScalarField> f;
  if (with_field) f = build_field(ctx, "eval");

  auto header = concat(Table::coordinate_header("x", n), {"F"});
  header = concat(header, Table::coordinate_header("g_eig", n));
  header = concat(header, {"legendre_residual", "dual_residual"});
  if (with_field) header = concat(concat(header, {"f"}), Table::coordinate_header("grad", n));
  Table table(header);

  const auto points = grid.points();
  std::vector<std::vector<double>> rows(points.size());
  parallel_for(points.size(), ctx.threads, [&](std::size_t k) {
    const Vec& x = points[k];
    const TangentVector v{x, y};
    const double Fy = evaluate_norm(ctx.F, v);
    const Mat g = fundamental_tensor(ctx.F, v).matrix;
    Eigen::SelfAdjointEigenSolver<Mat> eig(g);
    const Covector a = legendre(ctx.F, v);
    const Vec back = inverse_legendre(ctx.F, a).components;
    std::vector<double> r{Fy};
    for (int i = 0; i < n; ++i) r.push_back(eig.eigenvalues()[i]);
    r.push_back((back - y).norm() / y.norm());
    r.push_back(std::abs(dual_norm(ctx.F, a) - Fy));
    if (f) {
      r.push_back(f->value(x));
      const Vec gr = gradient(*f, ctx.F, x).components;
      for (int i = 0; i < n; ++i) r.push_back(gr[i]);
    }
    rows[k] = std::move(r);
  });
  double min_eig = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < points.size(); ++k) {
    table.row().add(points[k]);
    for (double v : rows[k]) table.add(v);
    for (int i = 0; i < n; ++i) min_eig = std::min(min_eig, rows[k][static_cast<std::size_t>(1 + i)]);
  }
  table.write(ctx.output("eval.tsv"));
  ctx.summary.emplace_back("rows", std::to_string(points.size()));
  ctx.summary.emplace_back("min_eigenvalue", fmt(min_eig));
  return kExitOk;
}

int cmd_geodesic(Context& ctx) {
  const int n = ctx.dimension();
  const Config& c = ctx.config;
  const Vec x = c.vector("geodesic", "point", n);
  const Vec v = c.vector("geodesic", "direction", n);
  const double length = c.number("geodesic", "length", 10.0);
  const double step = c.number("geodesic", "step", kDefaultStep);
  const int stride = c.integer("geodesic", "stride", 100);
  if (!(length > 0.0) || !(step > 0.0) || stride < 1)
    throw ConfigError(c.source() + ": [geodesic] length, step and stride must be positive");
  const GeodesicRecord rec = integrate_geodesic(ctx.F, x, v, length, step, stride);

  Table table(concat(concat(concat({"t"}, Table::coordinate_header("x", n)), Table::coordinate_header("v", n)),
                     {"speed_error"}));
  for (const auto& s : rec.samples)
    table.row().add(s.t).add(s.x).add(s.v).add(ctx.F.norm(s.x, s.v) - 1.0);
  table.write(ctx.output("geodesic.tsv"));
  ctx.checks.push_back(upper_check("geodesic.speed_conservation", "unit speed is conserved along the geodesic",
                                   rec.speed_drift, kDefaultSpeedDrift));
  ctx.write_report("geodesic_report.txt", "geodesic");
  return ctx.all_passed() ? kExitOk : kExitCheckFailed;
}

int cmd_distance(Context& ctx) {
  const int n = ctx.dimension();
  const Config& c = ctx.config;
  std::vector<Vec> from, to;
  if (c.has("distance", "from")) {
    from = c.vectors("distance", "from", n);
    to = c.vectors("distance", "to", n);
    if (from.size() != to.size())
      throw ConfigError(c.source() + ": [distance] from and to need the same number of points");
  } else {
    const Grid grid = build_grid(c, n);
    const int samples = c.integer("distance", "samples", 20);
    Rng rng(ctx.seed);
    auto draw = [&] {
      Vec x(n);
      for (int i = 0; i < n; ++i) x[i] = rng.uniform(grid.box.lower[i], grid.box.upper[i]);
      return x;
    };
    for (int k = 0; k < samples; ++k) {
      from.push_back(draw());
      to.push_back(draw());
    }
  }
  std::vector<DistanceResult> fwd(from.size()), bwd(from.size());
  parallel_for(from.size(), ctx.threads, [&](std::size_t k) {
    fwd[k] = distance(ctx.F, from[k], to[k], ctx.distance);
    bwd[k] = distance(ctx.F, to[k], from[k], ctx.distance);
  });
  Table table(concat(concat(Table::coordinate_header("p", n), Table::coordinate_header("q", n)),
                     {"d_pq", "d_qp", "asymmetry", "method", "error_estimate"}));
  for (std::size_t k = 0; k < from.size(); ++k)
    table.row()
        .add(from[k])
        .add(to[k])
        .add(fwd[k].value)
        .add(bwd[k].value)
        .add(fwd[k].value - bwd[k].value)
        .add_text(std::string(to_string(fwd[k].method)))
        .add(std::max(fwd[k].error_estimate, bwd[k].error_estimate));
  table.write(ctx.output("distance.tsv"));
  ctx.summary.emplace_back("pairs", std::to_string(from.size()));
  return kExitOk;
}

namespace {

/// Points off the backward axis {origin - s v : s >= 0} of a ray.
bool off_backward_axis(const Ray& eta, const Vec& x) {
  const Vec d = x - eta.origin();
  const Vec v = eta.direction() / eta.direction().norm();
  const double along = d.dot(v);
  return along > 0.0 || (d - along * v).norm() > 1e-6;
}

std::vector<std::pair<Vec, Vec>> sample_pairs(const std::vector<Vec>& pool, int count, std::uint64_t seed) {
  std::vector<std::pair<Vec, Vec>> out;
  if (pool.size() < 2) return out;
  Rng rng(seed);
  while (static_cast<int>(out.size()) < count) {
    const auto i = static_cast<std::size_t>(rng.uniform() * static_cast<double>(pool.size()));
    const auto j = static_cast<std::size_t>(rng.uniform() * static_cast<double>(pool.size()));
    if (i != j) out.emplace_back(pool[i], pool[j]);
  }
  return out;
}

}  // namespace

/// Field export and the truncation checks shared with the busemann suite.
/// Returns false when some bracket did not close.
bool busemann_field_checks(Context& ctx, const Ray& eta, const Grid& grid, bool write_field, int lipschitz_pairs) {
  const int n = ctx.dimension();
  const BusemannField b(eta, ctx.tol, ctx.busemann);
  const auto points = grid.points();
  const auto evals = b.evaluate(points, ctx.threads);

  if (write_field) {
    Table table(concat(Table::coordinate_header("x", n), {"b", "bracket_width", "t_final"}));
    for (const auto& e : evals) table.row().add(e.point).add(e.value).add(e.bracket_width()).add(e.t_final);
    table.write(ctx.output("busemann_field.tsv"));
  }

  int unconverged = 0;
  double mono = 0.0, mono_bound = 0.0, max_t = 0.0, max_width = 0.0;
  double mono_ratio = 0.0;
  double lower_excess = -std::numeric_limits<double>::infinity();
  for (const auto& e : evals) {
    if (!e.converged) ++unconverged;
    const double allowed = 2.0 * e.solver_tolerance;
    if (e.monotonicity_excess / allowed > mono_ratio) {
      mono_ratio = e.monotonicity_excess / allowed;
      mono = e.monotonicity_excess;
      mono_bound = allowed;
    }
    lower_excess = std::max(lower_excess, -e.base_distance - e.solver_tolerance - e.upper);
    max_t = std::max(max_t, e.t_final);
    max_width = std::max(max_width, e.bracket_width());
  }
  if (mono_bound == 0.0) mono_bound = 2.0 * kDistanceTolerance;
  ctx.summary.emplace_back("points", std::to_string(points.size()));
  ctx.summary.emplace_back("max_t_final", fmt(max_t));
  ctx.summary.emplace_back("max_bracket_width", fmt(max_width));
  ctx.checks.push_back(upper_check("busemann.convergence", "the truncation bracket closes below tol at every point",
                                   max_width, ctx.tol, std::to_string(unconverged) + " unconverged"));
  ctx.checks.push_back(upper_check("busemann.monotonicity",
                                   "truncations b_t(x) are non-increasing in t up to twice the solver tolerance",
                                   mono, mono_bound));
  ctx.checks.push_back(upper_check("busemann.lower_bound", "b_t(x) >= -d(gamma(0), x) - solver tolerance",
                                   lower_excess, 0.0));

  // unit gradient off the backward axis
  {
    const GradientFieldReport g = busemann_gradient_field(b, grid, ctx.threads);
    double worst = 0.0;
    double forward = 0.0;
    for (std::size_t k = 0; k < g.points.size(); ++k) {
      if (!off_backward_axis(eta, g.points[k])) continue;
      worst = std::max(worst, std::abs(g.unit_norm[k] - 1.0));
      forward = std::max(forward, std::abs(g.forward_norm[k] - 1.0));
    }
    ctx.checks.push_back(upper_check("busemann.unit_gradient", "the dual norm of -db equals 1 off the backward axis",
                                     worst, 1e-4, "max |F(grad b) - 1| = " + fmt(forward)));
  }

  if (lipschitz_pairs > 0) {
    const auto pairs = sample_pairs(points, lipschitz_pairs, ctx.seed);
    const LipschitzReport L = lipschitz_check(b, pairs, ctx.threads);
    ctx.checks.push_back(upper_check("busemann.lipschitz", "-d(x, y) <= b(y) - b(x) <= d(y, x) on sampled pairs",
                                     L.worst_excess, 0.0,
                                     std::to_string(L.violations) + " violations of " + std::to_string(L.pairs) +
                                         "; swapped form: " + std::to_string(L.swapped_violations) +
                                         " violations, worst " + fmt(L.swapped_worst_excess)));
  }

  if (ctx.F.point_independent()) {
    double worst = 0.0, slack = 0.0;
    for (const auto& e : evals) {
      const double d = std::abs(e.value - minkowski_closed_form(ctx.F, eta.direction(), e.point - eta.origin()));
      if (d - e.solver_tolerance > worst - slack) {
        worst = d;
        slack = e.solver_tolerance;
      }
    }
    ctx.checks.push_back(upper_check("busemann.closed_form", "b(x) = -(x - p) . dF(v) on Minkowski structures",
                                     worst, ctx.tol + slack));
  }
  return unconverged == 0;
}

int cmd_busemann(Context& ctx) {
  const Ray eta = build_ray(ctx);
  const Grid grid = build_grid(ctx.config, ctx.dimension());
  const int pairs = ctx.config.integer("busemann", "pairs", 100);
  const bool converged = busemann_field_checks(ctx, eta, grid, true, pairs);
  ctx.write_report("busemann_report.txt", "busemann");
  if (!converged) {
    *ctx.log << "busemann: some brackets did not close within t_max = " << fmt(ctx.busemann.t_max)
             << "; best brackets written\n";
    return kExitNotConverged;
  }
  return ctx.all_passed() ? kExitOk : kExitCheckFailed;
}

int cmd_horosphere(Context& ctx) {
  const int n = ctx.dimension();
  const Ray eta = build_ray(ctx);
  const Grid grid = build_grid(ctx.config, n);
  const double level = ctx.config.number("horosphere", "level", 0.0);
  const double band = ctx.config.number("horosphere", "band", 0.0);
  const BusemannField b(eta, ctx.tol, ctx.busemann);
  const Horosphere h = horosphere_extract(b, level, grid, band, ctx.threads);
  Table table(concat(Table::coordinate_header("x", n), {"b"}));
  for (std::size_t k = 0; k < h.samples.size(); ++k) table.row().add(h.samples[k]).add(h.values[k]);
  table.write(ctx.output("horosphere.tsv"));
  ctx.summary.emplace_back("level", fmt(level));
  ctx.summary.emplace_back("samples", std::to_string(h.samples.size()));
  if (!h.notes.empty()) ctx.summary.emplace_back("notes", h.notes);
  ctx.checks.push_back(upper_check("horosphere.level", "extracted samples satisfy |b - c| <= band", h.max_level_error,
                                   h.band));
  ctx.checks.push_back(upper_check("horosphere.unit_gradient", "the dual norm of -db equals 1 on the horosphere",
                                   h.max_unit_deviation, 1e-4));
  ctx.write_report("horosphere_report.txt", "horosphere");
  return ctx.all_passed() ? kExitOk : kExitCheckFailed;
}

int cmd_laplacian(Context& ctx) {
  const int n = ctx.dimension();
  const ScalarField f = build_field(ctx, "laplacian");
  const VolumeForm mu(ctx.F, ctx.volume);
  const auto points = sample_points(ctx, "laplacian");
  std::vector<LaplacianReport> out(points.size());
  parallel_for(points.size(), ctx.threads, [&](std::size_t k) { out[k] = shen_laplacian(ctx.F, mu, f, points[k]); });
  Table table(concat(Table::coordinate_header("x", n), {"laplacian", "stencil_gap", "density"}));
  for (std::size_t k = 0; k < points.size(); ++k)
    table.row().add(points[k]).add(out[k].value).add(out[k].stencil_gap).add(mu.density(points[k]));
  table.write(ctx.output("laplacian.tsv"));
  ctx.summary.emplace_back("field", f.name);
  ctx.summary.emplace_back("volume", std::string(to_string(ctx.volume)));
  ctx.summary.emplace_back("density_source", std::string(mu.provenance()));
  if (ctx.config.has("laplacian", "expected")) {
    const double expected = ctx.config.number("laplacian", "expected");
    double worst = 0.0;
    for (const auto& r : out) worst = std::max(worst, std::abs(r.value - expected));
    ctx.checks.push_back(upper_check("laplacian.expected", "the Laplacian equals the configured constant", worst,
                                     ctx.config.number("laplacian", "tolerance", 1e-5)));
  }
  ctx.write_report("laplacian_report.txt", "laplacian");
  return ctx.all_passed() ? kExitOk : kExitCheckFailed;
}

int cmd_harmonic(Context& ctx) {
  const int n = ctx.dimension();
  const Config& c = ctx.config;
  const Vec base = c.vector("harmonic", "base", n);
  const auto radii = c.numbers("harmonic", "radii", {0.25, 0.5, 1.0});
  const int directions = c.integer("harmonic", "directions", 16);
  const VolumeForm mu(ctx.F, ctx.volume);
  const HarmonicityReport h =
      harmonicity_check(ctx.F, mu, base, radii, directions, c.number("harmonic", "threshold", kHarmonicThreshold));
  Table table(concat(concat({"r", "k"}, Table::coordinate_header("u", n)), {"density", "raw"}));
  for (std::size_t i = 0; i < h.radii.size(); ++i)
    for (std::size_t k = 0; k < h.directions.size(); ++k)
      table.row()
          .add(h.radii[i])
          .add(static_cast<int>(k))
          .add(h.directions[k])
          .add(h.density[i][k])
          .add(h.raw[i][k]);
  table.write(ctx.output("harmonic.tsv"));
  ctx.summary.emplace_back("radial_deviation", fmt(h.radial_deviation));
  ctx.summary.emplace_back("raw_radial_deviation", fmt(h.raw_radial_deviation));
  ctx.summary.emplace_back("harmonic", h.harmonic ? "true" : "false");
  if (!h.notes.empty()) ctx.summary.emplace_back("notes", h.notes);
  ctx.write_report("harmonic_report.txt", "harmonic");
  return kExitOk;
}

std::vector<Ray> ahf_rays(const Context& ctx) {
  const int n = ctx.dimension();
  const Config& c = ctx.config;
  if (!c.has("ahf", "directions")) return {build_ray(ctx)};
  const auto dirs = c.vectors("ahf", "directions", n);
  std::vector<Vec> origins;
  if (c.has("ahf", "origins")) origins = c.vectors("ahf", "origins", n);
  else origins.assign(dirs.size(), c.vector("ray", "origin", n));
  if (origins.size() != dirs.size())
    throw ConfigError(c.source() + ": [ahf] origins and directions need the same length");
  std::vector<Ray> rays;
  for (std::size_t i = 0; i < dirs.size(); ++i) rays.emplace_back(ctx.F, origins[i], dirs[i]);
  return rays;
}

AhfOptions ahf_options(const Context& ctx) {
  const Config& c = ctx.config;
  AhfOptions o;
  o.threshold = c.number("ahf", "threshold", o.threshold);
  o.laplacian_tolerance = c.number("ahf", "laplacian_tolerance", o.laplacian_tolerance);
  o.weak_tolerance = c.number("ahf", "weak_tolerance", o.weak_tolerance);
  o.weak_nodes = c.integer("ahf", "weak_nodes", o.weak_nodes);
  o.weak_rays = c.integer("ahf", "weak_rays", o.weak_rays);
  o.busemann = ctx.busemann;
  o.threads = ctx.threads;
  return o;
}

int cmd_ahf(Context& ctx) {
  const int n = ctx.dimension();
  const auto rays = ahf_rays(ctx);
  const auto points = sample_points(ctx, "ahf");
  const VolumeForm mu(ctx.F, ctx.volume);
  const AhfReport r = ahf_diagnose(ctx.F, mu, rays, points, ahf_options(ctx));
  Table table(concat(concat({"ray"}, Table::coordinate_header("x", n)), {"laplacian", "t", "converged"}));
  for (std::size_t i = 0; i < r.samples.size(); ++i)
    for (std::size_t k = 0; k < r.samples[i].size(); ++k) {
      const auto& s = r.samples[i][k];
      table.row().add(static_cast<int>(i)).add(r.points[k]).add(s.value).add(s.t).add(s.converged ? 1 : 0);
    }
  table.write(ctx.output("ahf.tsv"));
  ctx.summary.emplace_back("h", fmt(r.h));
  ctx.summary.emplace_back("spread", fmt(r.spread));
  ctx.summary.emplace_back("weak_residual", fmt(r.weak_residual));
  ctx.summary.emplace_back("verdict", r.verdict);
  ctx.write_report("ahf_report.txt", "ahf");
  return kExitOk;
}

}  // namespace finsler::harness
