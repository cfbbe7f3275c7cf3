#pragma once

#include "finsler/grid.hpp"
#include "finsler/laplacian.hpp"
#include "finsler/ray.hpp"

#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace finsler {

inline constexpr double kBusemannTMax = 16384.0;

struct BusemannOptions {
  double t_max = kBusemannTMax;
  DistanceOptions distance;
};

struct TruncationStep {
  double t = 0.0;
  double value = 0.0;  // b_t(x) = d(x, gamma(t)) - t
  double error_estimate = 0.0;
  DistanceMethod method = DistanceMethod::closed_form;
};

struct BusemannEvaluation {
  std::string ray_id;
  Vec point;
  double tolerance = 0.0;
  double value = 0.0;  // = upper
  double t_final = 0.0;
  double lower = 0.0;
  double upper = 0.0;
  bool converged = false;
  std::vector<TruncationStep> steps;
  /// max(error_estimate, kDistanceTolerance) over the solves.
  double solver_tolerance = kDistanceTolerance;
  /// Largest increase b_2t - b_t seen along the doubling (0 when monotone).
  double monotonicity_excess = 0.0;
  bool monotone = true;
  /// d(gamma(0), x); upper >= -base_distance - solver_tolerance.
  double base_distance = 0.0;
  /// Differential of b_{t_final} at x (first variation); empty at gamma(t_final).
  Vec differential;
  std::string diagnostics;

  double bracket_width() const { return upper - lower; }
};

/// d(x, gamma(t)) - t.
double truncated_busemann(const Ray& eta, double t, const Vec& x, const DistanceOptions& options = {});

/// b_t as a field in x, differential -J(x, u) with u the initial unit
/// velocity of the minimizing geodesic from x to gamma(t).
ScalarField truncated_busemann_field(const Ray& eta, double t, const DistanceOptions& options = {});

/// Doubles t from max(1, 2 d(gamma(0), x)) until the estimated remaining
/// decrease b_t - b is below tol. The estimate is the last decrement
/// b_t - b_2t, widened by the geometric tail d r / (1 - r) when the ratio r of
/// the last two decrements exceeds 1/2. Returns the last truncation
/// b_{t_final} with the bracket [upper - tail, upper]. When 2t would exceed
/// t_max the evaluation is returned with converged = false and the best bracket.
BusemannEvaluation busemann(const Ray& eta, const Vec& x, double tol, const BusemannOptions& options = {});

/// Memoized Busemann function of a ray at a fixed tolerance. Entries are keyed
/// by the exact point, so a value never depends on evaluation order. Copies
/// share the memo.
class BusemannField {
 public:
  BusemannField(Ray eta, double tol, BusemannOptions options = {});

  const Ray& ray() const { return ray_; }
  double tolerance() const { return tol_; }
  const BusemannOptions& options() const { return options_; }

  BusemannEvaluation evaluate(const Vec& x) const;
  std::vector<BusemannEvaluation> evaluate(const std::vector<Vec>& points, int threads = 1) const;
  double value(const Vec& x) const { return evaluate(x).value; }
  /// Value and first-variation differential of the final truncation.
  ScalarField scalar_field() const;
  std::size_t memo_size() const;

 private:
  struct Memo;
  Ray ray_;
  double tol_;
  BusemannOptions options_;
  std::shared_ptr<Memo> memo_;
};

/// -y . dF(v) for point-independent F.
double minkowski_closed_form(const FinslerStructure& F, const Vec& v, const Vec& y);
/// x -> -(x - p) . dF(v), the Busemann function of the straight ray from p.
ScalarField minkowski_busemann_field(const FinslerStructure& F, const Vec& p, const Vec& v);

struct CandidateCheck {
  std::string name;    // "velocity", "gradient" or "reverse-gradient"
  Vec direction;       // initial velocity of the candidate curve s -> exp(p, s w)
  double residual = 0.0;  // max_s |b(exp(p, s w)) - (b(p) - s)|
};

struct AsymptoteOptions {
  double t0 = 1.0;
  int max_doublings = 14;
  /// Euclidean gap between successive normalized velocities.
  double cauchy_tolerance = 1e-4;
  std::vector<double> check_s = {1.0, 2.0, 4.0, 8.0};
  double busemann_tolerance = 1e-5;
  BusemannOptions busemann;
};

struct AsymptoteReport {
  std::optional<Ray> zeta;
  MinimizerSequence sequence;
  bool converged = false;
  /// |v(1.5 t_last) - v(t_last)|, the velocity change under a shifted schedule.
  double schedule_sensitivity = 0.0;
  double b_at_p = 0.0;
  Vec differential;  // db_eta(p)
  Vec gradient;      // J*(db_eta(p))
  std::vector<CandidateCheck> candidates;
  std::string relation;  // name of the candidate with the smallest residual
  std::string notes;
};

/// Asymptotic ray from p to eta: limit of the initial velocities of minimizing
/// geodesics p -> eta(t) along t = t0 2^k. The candidates exp(p, s w) for
/// w = zeta'(0), grad b(p) and J*(-db(p)) are checked against
/// b(exp(p, s w)) = b(p) - s.
AsymptoteReport asymptote(const Ray& eta, const Vec& p, const AsymptoteOptions& options = {});

struct AsymptoteRelationReport {
  double b_at_p = 0.0;
  std::vector<double> s;
  std::vector<double> ray_residuals;  // |b_eta(zeta(s)) - (b_eta(p) - s)|
  double max_ray_residual = 0.0;
  /// max over x of b_eta(x) - b_zeta(x) - b_eta(p); <= 0 when the inequality holds.
  double max_inequality_excess = 0.0;
  /// max - min over x of b_zeta(x) - b_eta(x).
  double difference_spread = 0.0;
  double tolerance = 0.0;
};

AsymptoteRelationReport verify_asymptote_relation(const BusemannField& eta, const BusemannField& zeta,
                                                  const std::vector<double>& s_list, const std::vector<Vec>& x_list,
                                                  int threads = 1);

struct GradientFieldReport {
  std::vector<Vec> points;
  std::vector<Vec> differentials;
  std::vector<Vec> gradients;       // J*(db)
  std::vector<double> forward_norm; // F(grad b)
  std::vector<double> unit_norm;    // F*(-db)
  double max_forward_deviation = 0.0;  // max |F(grad b) - 1|
  double max_unit_deviation = 0.0;     // max |F*(-db) - 1|
};

GradientFieldReport busemann_gradient_field(const BusemannField& b, const Grid& grid, int threads = 1);

struct LipschitzReport {
  int pairs = 0;
  /// Worst excess of -d(x, y) <= b(y) - b(x) <= d(y, x) beyond the combined tolerance (<= 0 when it holds).
  double worst_excess = 0.0;
  int violations = 0;
  /// Same for the variant -d(y, x) <= b(y) - b(x) <= d(x, y).
  double swapped_worst_excess = 0.0;
  int swapped_violations = 0;
};

LipschitzReport lipschitz_check(const BusemannField& b, const std::vector<std::pair<Vec, Vec>>& pairs,
                                int threads = 1);

struct Horosphere {
  std::string ray_id;
  double level = 0.0;
  double band = 0.0;
  Grid grid;
  std::vector<Vec> samples;
  std::vector<double> values;
  double max_level_error = 0.0;
  double max_unit_deviation = 0.0;
  std::string notes;
};

/// Grid points near b = c, each moved by one secant step along grad b and
/// kept when |b - c| <= band. band <= 0 selects 10 times the field tolerance.
Horosphere horosphere_extract(const BusemannField& b, double c, const Grid& grid, double band = 0.0,
                              int threads = 1);

struct SumReport {
  std::vector<double> sums;  // b_eta(x) + b_etabar(x)
  double max_abs = 0.0;
  double min_sum = 0.0;
};

/// Line through p with unit velocity v: eta under F and its backward ray
/// s -> gamma(-s) under the reverse structure.
SumReport forward_backward_sum(const FinslerStructure& F, const Vec& p, const Vec& v, const std::vector<Vec>& x_list,
                               double tol, const BusemannOptions& options = {}, int threads = 1);

struct BusemannLaplacian {
  double value = 0.0;  // extrapolated limit
  double last_truncation = 0.0;
  double t = 0.0;
  bool converged = false;
  std::vector<std::pair<double, double>> history;  // (t, Delta b_t(x))
  std::string notes;
};

/// Delta b_t(x) along the doubling schedule. Stops when two successive values
/// differ by less than tol, or when two successive Richardson combinations
/// 2 Delta b_2t - Delta b_t do (the 1/t decay of flat models); the value is the
/// one that met the test.
BusemannLaplacian busemann_laplacian(const Ray& eta, const VolumeForm& mu, const Vec& x, double tol,
                                     const BusemannOptions& options = {});

struct AhfOptions {
  double threshold = 1e-3;
  double laplacian_tolerance = 1e-4;
  double weak_tolerance = 1e-3;
  int weak_nodes = 8;
  /// Rays used for the weak residual (the first ones in the list).
  int weak_rays = 1;
  std::optional<Box> weak_domain;  // default: bounding box of the points
  BusemannOptions busemann;
  int threads = 1;
};

struct AhfReport {
  std::string structure_id;
  VolumeKind volume = VolumeKind::busemann_hausdorff;
  std::vector<std::string> rays;
  std::vector<Vec> points;
  /// samples[r][k] = Delta b_r at points[k]
  std::vector<std::vector<BusemannLaplacian>> samples;
  double h = 0.0;
  double spread = 0.0;
  double weak_residual = 0.0;
  double threshold = 0.0;
  double weak_tolerance = 0.0;
  bool consistent = false;
  std::string verdict;
};

AhfReport ahf_diagnose(const FinslerStructure& F, const VolumeForm& mu, const std::vector<Ray>& rays,
                       const std::vector<Vec>& points, const AhfOptions& options = {});

struct DistanceFunctionReport {
  double f_at_p = 0.0;
  double gradient_norm_at_p = 0.0;  // F(grad f(p))
  std::vector<double> deviations;   // |f(x) - bbar(x)|
  double max_deviation = 0.0;
};

/// Compares a distance function f with the backward Busemann function of the
/// line through p tangent to grad f(p).
DistanceFunctionReport distance_function_vs_busemann(const FinslerStructure& F, const ScalarField& f, const Vec& p,
                                                     const std::vector<Vec>& x_list, double tol,
                                                     const BusemannOptions& options = {}, int threads = 1);

struct TotalBoundReport {
  int samples = 0;
  int violations = 0;
  double worst_excess = 0.0;  // of -d(p, x) <= b(x) <= d(x, p); <= 0 when it holds
  double sup = 0.0;
  double inf = 0.0;
  /// max over the sample of |b_{y_n} - b_y| along the sequence.
  std::vector<double> sequence_gaps;
};

/// Busemann functions of the rays from p in the given directions on a sample
/// of a box. Closed form for point-independent structures, doubling otherwise.
TotalBoundReport total_busemann_bound(const FinslerStructure& F, const Vec& p, const std::vector<Vec>& directions,
                                      const std::vector<Vec>& omega, const std::vector<Vec>& sequence = {},
                                      const Vec& sequence_limit = {}, double tol = 1e-5,
                                      const BusemannOptions& options = {});

/// min over y in {u = level} of d(x, y), for point-independent F with straight
/// geodesics; u is sampled along rays from x.
double level_set_distance(const FinslerStructure& F, const ScalarField& u, const Vec& x, double level);

/// |<Delta b_t, phi> - <Delta b, phi>| along t_list, pairings in the weak form.
std::vector<double> distributional_gaps(const Ray& eta, const VolumeForm& mu, const ScalarField& limit,
                                        const Bump& phi, const std::vector<double>& t_list, int nodes = 12);

/// max over points of |b_t - b| along t_list.
std::vector<double> uniform_gaps(const Ray& eta, const ScalarField& limit, const std::vector<Vec>& points,
                                 const std::vector<double>& t_list);

}  // namespace finsler
