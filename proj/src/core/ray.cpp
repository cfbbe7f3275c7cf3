#include "finsler/ray.hpp"

#include <cmath>
#include <cstdio>
#include <mutex>
#include <sstream>

namespace finsler {

namespace {

constexpr double kCheckpointSpacing = 1.0;

std::string vec_id(const Vec& v) {
  std::string out;
  char buf[32];
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%s%.17g", i ? "," : "", v[i]);
    out += buf;
  }
  return out;
}

}  // namespace

struct Ray::Store {
  std::mutex mutex;
  std::vector<GeodesicState> checkpoints;  // checkpoint k sits at t = k * spacing
};

Ray::Ray(FinslerStructure F, Vec origin, Vec direction, double dt)
    : F_(std::move(F)), origin_(std::move(origin)), dt_(dt), store_(std::make_shared<Store>()) {
  F_.chart().require_contains(origin_, "ray origin");
  const double f = F_.model().norm(origin_, direction);
  if (!(f > 0.0)) throw DegenerateDirectionError("ray direction is zero");
  direction_ = direction / f;
  id_ = F_.id() + "|" + vec_id(origin_) + "|" + vec_id(direction_);
  store_->checkpoints.push_back({origin_, direction_});
}

GeodesicState Ray::state(double t) const {
  if (!(t >= 0.0)) throw FinslerError(ErrorCode::invalid_argument, "ray parameter must be nonnegative");
  if (F_.point_independent()) {
    const Vec x = origin_ + t * direction_;
    if (!F_.chart().contains(x)) throw DomainExit("ray leaves chart", t, origin_, direction_);
    return {x, direction_};
  }
  const auto k = static_cast<std::size_t>(std::floor(t / kCheckpointSpacing));
  const int steps_per_checkpoint = static_cast<int>(std::lround(kCheckpointSpacing / dt_));
  GeodesicState base;
  {
    std::lock_guard<std::mutex> lock(store_->mutex);
    auto& cps = store_->checkpoints;
    while (cps.size() <= k) cps.push_back(flow_steps(F_, cps.back(), kCheckpointSpacing, steps_per_checkpoint));
    base = cps[k];
  }
  const double rest = t - static_cast<double>(k) * kCheckpointSpacing;
  if (rest <= 0.0) return base;
  const int steps = std::max(1, static_cast<int>(std::ceil(rest / dt_ - 1e-9)));
  return flow_steps(F_, base, rest, steps);
}

RayCheck make_ray(const FinslerStructure& F, const Vec& p, const Vec& v, double t_check,
                  const DistanceOptions& options) {
  if (!(t_check > 0.0)) throw FinslerError(ErrorCode::invalid_argument, "ray check length must be positive");
  Ray ray(F, p, v, options.step);
  RayCheck out;
  const int steps = static_cast<int>(std::ceil(t_check / options.step));
  out.record = integrate_geodesic(F, p, ray.direction(), t_check, options.step, std::max(1, steps / 200));
  static constexpr double kFractions[] = {0.0, 0.1, 0.3, 0.6, 1.0};
  std::ostringstream report;
  bool minimal = true;
  for (std::size_t i = 0; i < std::size(kFractions); ++i) {
    for (std::size_t j = i + 1; j < std::size(kFractions); ++j) {
      const double s = kFractions[i] * t_check;
      const double t = kFractions[j] * t_check;
      const DistanceResult d = distance(F, ray.point(s), ray.point(t), options);
      const double violation = std::abs(d.value - (t - s));
      const double slack = std::max(10.0 * d.error_estimate, 1e-6 * (1.0 + t - s));
      out.worst_violation = std::max(out.worst_violation, violation);
      ++out.pairs_checked;
      if (violation > slack) {
        minimal = false;
        report << "d(gamma(" << s << "), gamma(" << t << ")) = " << d.value << " differs from " << t - s << "; ";
      }
    }
  }
  if (minimal) {
    ray.set_minimality_checked_up_to(t_check);
    out.ray = ray;
    out.report = "minimal on sampled pairs";
  } else {
    out.report = "not minimal: " + report.str();
  }
  return out;
}

MinimizerSequence minimizer_sequence(const FinslerStructure& F, const Vec& p, const Ray& eta,
                                     const std::vector<double>& t_list, double tolerance,
                                     const DistanceOptions& options) {
  MinimizerSequence out;
  double prev_t = -1.0;
  for (std::size_t i = 0; i < t_list.size(); ++i) {
    const double t = t_list[i];
    if (!(t > prev_t)) throw FinslerError(ErrorCode::invalid_argument, "t_list must be increasing");
    prev_t = t;
    DistanceResult d;
    try {
      d = distance(F, p, eta.point(t), options);
    } catch (const FinslerError& e) {
      throw FinslerError(e.code(), "minimizer sequence failed at index " + std::to_string(i) + ": " + e.what());
    }
    Vec velocity = d.initial_velocity.size() ? d.initial_velocity : eta.state(t).v;
    out.steps.push_back({t, velocity, d.value});
  }
  if (out.steps.size() >= 2) {
    const Vec& a = out.steps[out.steps.size() - 2].velocity;
    const Vec& b = out.steps.back().velocity;
    out.cauchy_gap = (a / a.norm() - b / b.norm()).norm();
    if (out.cauchy_gap <= tolerance) out.limit = b;
  }
  return out;
}

}  // namespace finsler
