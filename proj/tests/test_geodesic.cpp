#include <doctest.h>

#include "finsler/distance.hpp"
#include "finsler/ray.hpp"

#include <cmath>

using namespace finsler;

namespace {

double hyperbolic_distance(const Vec& p, const Vec& q) {
  return std::acosh(1.0 + (p - q).squaredNorm() / (2.0 * p[1] * q[1]));
}

}  // namespace

TEST_CASE("euclidean exponential map is a straight line") {
  const auto F = FinslerStructure::euclidean(2);
  const Vec end = exp_map(F, make_vec({1.0, 1.0}), make_vec({3.0, 4.0}), 2.0);
  CHECK((end - make_vec({7.0, 9.0})).norm() < 1e-10);
}

TEST_CASE("vertical hyperbolic geodesic climbs as exp(t)") {
  const auto F = FinslerStructure::hyperbolic(2);
  const auto rec = integrate_geodesic(F, make_vec({0.0, 1.0}), make_vec({0.0, 1.0}), 3.0);
  const auto& last = rec.samples.back();
  CHECK(last.t == doctest::Approx(3.0));
  CHECK(last.x[1] == doctest::Approx(std::exp(3.0)).epsilon(1e-9));
  CHECK(rec.speed_drift < 1e-6);
}

TEST_CASE("speed is conserved over [0, 50] on hyperbolic and swirl structures") {
  const auto H = FinslerStructure::hyperbolic(2);
  CHECK(integrate_geodesic(H, make_vec({0.0, 1.0}), make_vec({1.0, 0.3}), 50.0, kDefaultStep, 1000).speed_drift <
        1e-6);
  const auto S = FinslerStructure::custom_preset("swirl-randers", 2, {0.3});
  CHECK(integrate_geodesic(S, make_vec({0.2, 0.1}), make_vec({1.0, 0.0}), 10.0, kDefaultStep, 1000).speed_drift <
        1e-6);
}

TEST_CASE("hyperbolic distances match the arccosh formula") {
  const auto F = FinslerStructure::hyperbolic(2);
  Rng rng(11);
  for (int k = 0; k < 10; ++k) {
    const Vec p = make_vec({rng.uniform(-1, 1), rng.uniform(0.5, 2.0)});
    const Vec q = make_vec({rng.uniform(-1, 1), rng.uniform(0.5, 2.0)});
    const auto d = distance(F, p, q);
    CHECK(d.value == doctest::Approx(hyperbolic_distance(p, q)).epsilon(1e-6));
    CHECK(d.method != DistanceMethod::closed_form);
  }
}

TEST_CASE("randers shooting reproduces F(q - p) and the 2 beta(q - p) asymmetry") {
  const Vec beta = make_vec({0.5, -0.2});
  const auto F = FinslerStructure::randers_constant(beta);
  DistanceOptions shoot;
  shoot.closed_form = false;
  Rng rng(5);
  for (int k = 0; k < 10; ++k) {
    const Vec p = make_vec({rng.uniform(-1, 1), rng.uniform(-1, 1)});
    const Vec q = make_vec({rng.uniform(-1, 1), rng.uniform(-1, 1)});
    const double pq = distance(F, p, q, shoot).value;
    const double qp = distance(F, q, p, shoot).value;
    CHECK(std::abs(pq - ((q - p).norm() + beta.dot(q - p))) < 1e-6);
    CHECK(std::abs((pq - qp) - 2.0 * beta.dot(q - p)) < 1e-6);
  }
}

TEST_CASE("distance from a point to itself is zero with an empty path") {
  const auto F = FinslerStructure::hyperbolic(2);
  const auto d = distance(F, make_vec({0.0, 1.0}), make_vec({0.0, 1.0}));
  CHECK(d.value == 0.0);
  CHECK(d.path.empty());
}

TEST_CASE("lattice length bounds the distance from above and improves under refinement") {
  const auto F = FinslerStructure::randers_constant(make_vec({0.3, 0.0}));
  const Vec p = make_vec({0.0, 0.0}), q = make_vec({1.0, 0.7});
  const double exact = q.norm() + 0.3 * q[0];
  const auto coarse = lattice_distance(F, p, q, 0.1);
  const auto fine = lattice_distance(F, p, q, 0.05);
  CHECK(coarse.length >= exact - 1e-12);
  CHECK(fine.length >= exact - 1e-12);
  CHECK(fine.length - exact <= coarse.length - exact + 1e-12);
}

TEST_CASE("rays are minimizing on sampled pairs") {
  const auto F = FinslerStructure::hyperbolic(2);
  const auto rc = make_ray(F, make_vec({0.0, 1.0}), make_vec({0.0, 2.0}), 25.0);
  REQUIRE(rc.ray.has_value());
  CHECK(rc.worst_violation < 1e-6);
  CHECK(F.norm(rc.ray->origin(), rc.ray->direction()) == doctest::Approx(1.0));
  CHECK(rc.ray->point(5.0)[1] == doctest::Approx(std::exp(5.0)).epsilon(1e-8));
}

TEST_CASE("integration leaving the chart raises DomainExit") {
  const auto F = FinslerStructure::riemannian(ManifoldChart(make_vec({-1.0, -1.0}), make_vec({1.0, 1.0})),
                                              make_matrix_preset("identity", 2, {}), "box");
  CHECK_THROWS_AS(exp_map(F, Vec::Zero(2), make_vec({1.0, 0.0}), 2.0), DomainExit);
}
