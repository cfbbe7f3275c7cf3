#pragma once

#include "finsler/geodesic.hpp"

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace finsler {

enum class DistanceMethod { closed_form, shooting, lattice_fallback };

std::string_view to_string(DistanceMethod method);

/// Nonsymmetric distance d(from, to) with a witness path.
struct DistanceResult {
  Vec from;
  Vec to;
  double value = 0.0;
  std::vector<Vec> path;
  DistanceMethod method = DistanceMethod::closed_form;
  double error_estimate = 0.0;
  /// Unit initial and final velocities of the minimizing geodesic (empty when from == to).
  Vec initial_velocity;
  Vec final_velocity;
  int iterations = 0;
  /// Metric size of the final endpoint miss before the first-variation correction.
  double miss = 0.0;
};

/// Persistent or in-memory store for distance results, shared across queries.
/// Implementations must be thread-safe.
class DistanceCache {
 public:
  virtual ~DistanceCache() = default;
  virtual std::optional<DistanceResult> find(const std::string& structure_id, const Vec& p, const Vec& q) = 0;
  virtual void store(const std::string& structure_id, const DistanceResult& result) = 0;
};

/// Nominal tolerance of the two-point solver; property checks use
/// max(error_estimate, kDistanceTolerance) as the solver slack.
inline constexpr double kDistanceTolerance = 1e-8;

struct DistanceOptions {
  double step = kDefaultStep;
  /// Endpoint miss (metric units) at which shooting is accepted.
  double miss_tolerance = 1e-10;
  /// A solve that stalls above miss_tolerance is still accepted below this miss.
  double accept_miss = 1e-5;
  int max_iterations = 40;
  bool use_lattice = true;
  /// Number of polyline vertices kept in the witness path of a shooting solve.
  int path_samples = 64;
  DistanceCache* cache = nullptr;
  /// Point-independent structures use F(q - p) directly; false forces shooting.
  bool closed_form = true;
};

DistanceResult distance(const FinslerStructure& F, const Vec& p, const Vec& q, const DistanceOptions& options = {});

struct LatticePath {
  double length = 0.0;  // F-length of the returned polyline
  std::vector<Vec> path;
  double spacing = 0.0;
  int nodes_per_axis = 0;
};

/// Dijkstra on a grid anchored at p with the full {-1,0,1}^n stencil and
/// directed edge weights F(midpoint, edge). With `smooth`, the node path is
/// shortened greedily and its interior vertices relaxed. spacing <= 0 selects
/// min(0.05, |q - p| / 40), widened when the grid would exceed the node budget.
LatticePath lattice_distance(const FinslerStructure& F, const Vec& p, const Vec& q, double spacing = 0.0,
                             bool smooth = true);

/// F-length of a polyline, 4-point Gauss-Legendre per segment.
double polyline_length(const FinslerStructure& F, const std::vector<Vec>& path);

}  // namespace finsler
