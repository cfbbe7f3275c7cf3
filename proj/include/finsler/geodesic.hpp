#pragma once

#include "finsler/structure.hpp"

#include <string>
#include <vector>

namespace finsler {

/// Default RK4 step in arc length.
inline constexpr double kDefaultStep = 1e-3;
/// Default bound on |F(x(t), x'(t)) - 1| along integrated geodesics.
inline constexpr double kDefaultSpeedDrift = 1e-6;

struct GeodesicState {
  Vec x;
  Vec v;
};

/// One classical RK4 step of x'' = -2 G(x, x'). Throws DomainExit (carrying
/// the input state) when any stage leaves the chart or turns non-finite.
GeodesicState spray_step(const FinslerStructure& F, const GeodesicState& state, double dt);

/// Integrates for time t with ceil(t / dt) equal steps (the final time is hit
/// exactly). The velocity is not normalized.
GeodesicState flow(const FinslerStructure& F, const GeodesicState& start, double t, double dt = kDefaultStep);

/// Integrates with a prescribed number of equal steps.
GeodesicState flow_steps(const FinslerStructure& F, const GeodesicState& start, double t, int steps);

struct GeodesicSample {
  double t;
  Vec x;
  Vec v;
};

struct GeodesicRecord {
  std::string structure_id;
  Vec initial_point;
  Vec initial_velocity;  // F = 1
  double step = kDefaultStep;
  std::vector<GeodesicSample> samples;
  double speed_drift = 0.0;
};

/// Unit-speed geodesic from x in direction v on [0, t_end]; one sample is kept
/// every `stride` steps plus the endpoint. Speed drift is measured at every step.
GeodesicRecord integrate_geodesic(const FinslerStructure& F, const Vec& x, const Vec& v, double t_end,
                                  double dt = kDefaultStep, int stride = 100);

/// Endpoint of the geodesic with initial velocity v / F(v) at arc length t * F(v).
Vec exp_map(const FinslerStructure& F, const Vec& x, const Vec& v, double t, double dt = kDefaultStep);

}  // namespace finsler
