#pragma once

#include "finsler/distance.hpp"

#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace finsler {

/// Unit-speed geodesic half-line t -> gamma(t), extended on demand.
///
/// Points are produced by integrating from checkpoints placed at fixed arc
/// length, so gamma(t) depends only on t. Copies share the checkpoint store,
/// which is synchronized internally.
class Ray {
 public:
  Ray(FinslerStructure F, Vec origin, Vec direction, double dt = kDefaultStep);

  const FinslerStructure& structure() const { return F_; }
  const Vec& origin() const { return origin_; }
  /// Unit initial velocity.
  const Vec& direction() const { return direction_; }
  double step() const { return dt_; }
  const std::string& id() const { return id_; }

  GeodesicState state(double t) const;
  Vec point(double t) const { return state(t).x; }

  double minimality_checked_up_to() const { return checked_up_to_; }
  void set_minimality_checked_up_to(double t) { checked_up_to_ = t; }

 private:
  struct Store;
  FinslerStructure F_;
  Vec origin_;
  Vec direction_;
  double dt_;
  std::string id_;
  double checked_up_to_ = 0.0;
  std::shared_ptr<Store> store_;
};

struct RayCheck {
  std::optional<Ray> ray;  // empty when minimality failed
  GeodesicRecord record;
  double worst_violation = 0.0;
  int pairs_checked = 0;
  std::string report;
};

/// Normalizes v and checks d(gamma(s), gamma(t)) = t - s on sampled pairs up
/// to t_check. On failure the trace is returned with a non-minimality report.
RayCheck make_ray(const FinslerStructure& F, const Vec& p, const Vec& v, double t_check,
                  const DistanceOptions& options = {});

struct MinimizerStep {
  double t;
  Vec velocity;  // unit initial velocity of the minimizing geodesic p -> eta(t)
  double distance;
};

struct MinimizerSequence {
  std::vector<MinimizerStep> steps;
  std::optional<Vec> limit;  // set when the last two velocities agree within tolerance
  /// Euclidean distance between the last two normalized velocities.
  double cauchy_gap = 0.0;
};

MinimizerSequence minimizer_sequence(const FinslerStructure& F, const Vec& p, const Ray& eta,
                                     const std::vector<double>& t_list, double tolerance = 1e-3,
                                     const DistanceOptions& options = {});

}  // namespace finsler
