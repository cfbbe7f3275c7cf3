#include "finsler/geodesic.hpp"

#include <cmath>

namespace finsler {

namespace {

bool finite(const Vec& v) { return v.allFinite(); }

}  // namespace

GeodesicState spray_step(const FinslerStructure& F, const GeodesicState& s, double dt) {
  const NormModel& m = F.model();
  const ManifoldChart& chart = F.chart();
  auto exit = [&](const char* what) { return DomainExit(what, 0.0, s.x, s.v); };
  if (!chart.contains(s.x)) throw exit("geodesic state outside chart");
  if (m.point_independent()) return {s.x + dt * s.v, s.v};

  auto acc = [&](const Vec& x, const Vec& v) {
    if (!chart.contains(x)) throw exit("geodesic left chart");
    Vec a = -2.0 * m.spray(x, v);
    if (!finite(a)) throw exit("geodesic acceleration is not finite");
    return a;
  };
  const Vec k1x = s.v;
  const Vec k1v = acc(s.x, s.v);
  const Vec k2x = s.v + 0.5 * dt * k1v;
  const Vec k2v = acc(s.x + 0.5 * dt * k1x, k2x);
  const Vec k3x = s.v + 0.5 * dt * k2v;
  const Vec k3v = acc(s.x + 0.5 * dt * k2x, k3x);
  const Vec k4x = s.v + dt * k3v;
  const Vec k4v = acc(s.x + dt * k3x, k4x);
  GeodesicState out{s.x + (dt / 6.0) * (k1x + 2.0 * k2x + 2.0 * k3x + k4x),
                    s.v + (dt / 6.0) * (k1v + 2.0 * k2v + 2.0 * k3v + k4v)};
  if (!chart.contains(out.x) || !finite(out.v)) throw exit("geodesic left chart");
  return out;
}

GeodesicState flow_steps(const FinslerStructure& F, const GeodesicState& start, double t, int steps) {
  if (t == 0.0 || steps <= 0) return start;
  if (F.point_independent()) {
    F.chart().require_contains(start.x, "geodesic start");
    Vec end = start.x + t * start.v;
    if (!F.chart().contains(end)) throw DomainExit("straight geodesic leaves chart", 0.0, start.x, start.v);
    return {end, start.v};
  }
  const double dt = t / steps;
  GeodesicState s = start;
  for (int k = 0; k < steps; ++k) {
    try {
      s = spray_step(F, s, dt);
    } catch (const DomainExit& e) {
      throw DomainExit(e.what(), k * dt, s.x, s.v);
    }
  }
  return s;
}

GeodesicState flow(const FinslerStructure& F, const GeodesicState& start, double t, double dt) {
  if (!(dt > 0.0)) throw FinslerError(ErrorCode::invalid_argument, "integration step must be positive");
  const double speed = F.model().norm(start.x, start.v);
  const int steps = static_cast<int>(std::ceil(std::abs(t) * speed / dt - 1e-9));
  return flow_steps(F, start, t, std::max(steps, 1));
}

GeodesicRecord integrate_geodesic(const FinslerStructure& F, const Vec& x, const Vec& v, double t_end, double dt,
                                  int stride) {
  F.chart().require_contains(x, "geodesic start");
  const double f = F.model().norm(x, v);
  if (!(f > 0.0)) throw DegenerateDirectionError("geodesic initial velocity is zero");
  if (!(t_end >= 0.0)) throw FinslerError(ErrorCode::invalid_argument, "geodesic end time must be nonnegative");
  GeodesicRecord rec;
  rec.structure_id = F.id();
  rec.initial_point = x;
  rec.initial_velocity = v / f;
  rec.step = dt;
  GeodesicState s{x, rec.initial_velocity};
  rec.samples.push_back({0.0, s.x, s.v});
  const int steps = static_cast<int>(std::ceil(t_end / dt - 1e-9));
  const double h = steps > 0 ? t_end / steps : 0.0;
  for (int k = 1; k <= steps; ++k) {
    try {
      s = spray_step(F, s, h);
    } catch (const DomainExit& e) {
      throw DomainExit(e.what(), (k - 1) * h, s.x, s.v);
    }
    rec.speed_drift = std::max(rec.speed_drift, std::abs(F.model().norm(s.x, s.v) - 1.0));
    if (k % stride == 0 || k == steps) rec.samples.push_back({k * h, s.x, s.v});
  }
  return rec;
}

Vec exp_map(const FinslerStructure& F, const Vec& x, const Vec& v, double t, double dt) {
  F.chart().require_contains(x, "exp_map base point");
  if (!(t >= 0.0)) throw FinslerError(ErrorCode::invalid_argument, "exp_map parameter must be nonnegative");
  if (t == 0.0) return x;
  const double f = F.model().norm(x, v);
  if (!(f > 0.0)) throw DegenerateDirectionError("exp_map direction is zero");
  return flow(F, {x, v}, t, dt).x;
}

}  // namespace finsler
