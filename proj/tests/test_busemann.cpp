#include <doctest.h>

#include "finsler/busemann.hpp"

#include <cmath>

using namespace finsler;

TEST_CASE("euclidean e1 ray: b = -x1 with a closed bracket") {
  const auto F = FinslerStructure::euclidean(2);
  const Ray eta(F, Vec::Zero(2), make_vec({1.0, 0.0}));
  for (const Vec& x : {make_vec({0.5, 0.2}), make_vec({-1.0, -0.25}), make_vec({0.0, 0.0})}) {
    const auto e = busemann(eta, x, 1e-4);
    CHECK(e.converged);
    CHECK(std::abs(e.value + x[0]) <= 1e-4);
    CHECK(e.lower <= -x[0] + 1e-12);
    CHECK(e.upper >= -x[0] - 1e-12);
    CHECK(e.t_final <= 1024.0);
    CHECK(e.monotonicity_excess <= 2.0 * e.solver_tolerance);
  }
}

TEST_CASE("randers ray: b(x) = -x . (v / |v| + beta)") {
  const Vec beta = make_vec({0.5, 0.0});
  const auto F = FinslerStructure::randers_constant(beta);
  const Vec v = make_vec({1.0, 0.0});
  const Ray eta(F, Vec::Zero(2), v);
  for (const Vec& x : {make_vec({0.3, 0.1}), make_vec({-0.7, -0.2})}) {
    const double oracle = -x.dot(v + beta);
    CHECK(std::abs(busemann(eta, x, 1e-4).value - oracle) <= 1e-4);
    CHECK(minkowski_closed_form(F, eta.direction(), x) == doctest::Approx(oracle));
  }
}

TEST_CASE("hyperbolic vertical ray: b = -log y") {
  const auto F = FinslerStructure::hyperbolic(2);
  const Ray eta(F, make_vec({0.0, 1.0}), make_vec({0.0, 1.0}));
  for (const Vec& x : {make_vec({0.3, 0.8}), make_vec({-0.4, 1.5})}) {
    const auto e = busemann(eta, x, 1e-4);
    CHECK(e.converged);
    CHECK(std::abs(e.value + std::log(x[1])) <= 1e-4);
  }
}

TEST_CASE("a low t_max leaves the bracket open") {
  const auto F = FinslerStructure::euclidean(2);
  const Ray eta(F, Vec::Zero(2), make_vec({1.0, 0.0}));
  BusemannOptions o;
  o.t_max = 2.0;
  const auto e = busemann(eta, make_vec({0.2, 0.9}), 1e-6, o);
  CHECK_FALSE(e.converged);
  CHECK(e.lower <= e.upper);
}

TEST_CASE("ray normalization b(gamma(t)) = -t") {
  const auto F = FinslerStructure::randers_constant(make_vec({0.0, 0.4}));
  const Ray eta(F, Vec::Zero(2), make_vec({1.0, 1.0}));
  const BusemannField b(eta, 1e-4);
  for (double t : {1.0, 5.0, 25.0}) CHECK(std::abs(b.value(eta.point(t)) + t) <= 1e-4);
}

TEST_CASE("field values do not depend on evaluation order or thread count") {
  const auto F = FinslerStructure::randers_constant(make_vec({0.3, 0.1}));
  const Ray eta(F, Vec::Zero(2), make_vec({1.0, 0.0}));
  std::vector<Vec> pts;
  for (int i = 0; i < 12; ++i) pts.push_back(make_vec({-1.0 + 0.17 * i, 0.02 * i}));
  std::vector<Vec> rev(pts.rbegin(), pts.rend());
  const auto a = BusemannField(eta, 1e-4).evaluate(pts, 1);
  const auto b = BusemannField(eta, 1e-4).evaluate(rev, 3);
  for (std::size_t i = 0; i < pts.size(); ++i) CHECK(a[i].value == b[pts.size() - 1 - i].value);
}

TEST_CASE("Lipschitz bound holds in the corrected form; the swapped form fails on randers") {
  const auto F = FinslerStructure::randers_constant(make_vec({0.5, 0.0}));
  const BusemannField b(Ray(F, Vec::Zero(2), make_vec({1.0, 0.0})), 1e-5);
  std::vector<std::pair<Vec, Vec>> pairs;
  Rng rng(3);
  for (int k = 0; k < 40; ++k)
    pairs.emplace_back(make_vec({rng.uniform(-1, 1), rng.uniform(-0.25, 0.25)}),
                       make_vec({rng.uniform(-1, 1), rng.uniform(-0.25, 0.25)}));
  const auto L = lipschitz_check(b, pairs);
  CHECK(L.violations == 0);
  CHECK(L.swapped_violations > 0);
}

TEST_CASE("forward and backward Busemann functions of a flat line cancel") {
  const auto F = FinslerStructure::randers_constant(make_vec({0.5, 0.0}));
  std::vector<Vec> xs;
  Rng rng(9);
  for (int k = 0; k < 20; ++k) xs.push_back(make_vec({rng.uniform(-1, 1), rng.uniform(-0.25, 0.25)}));
  const auto s = forward_backward_sum(F, Vec::Zero(2), make_vec({1.0, 0.0}), xs, 5e-6);
  CHECK(s.max_abs <= 2e-5);
}

TEST_CASE("unit gradient: the dual norm of -db is 1") {
  const auto F = FinslerStructure::randers_constant(make_vec({0.5, 0.0}));
  const BusemannField b(Ray(F, Vec::Zero(2), make_vec({1.0, 0.0})), 1e-4);
  Grid g{{make_vec({0.1, -0.2}), make_vec({0.9, 0.2})}, {3, 3}};
  const auto r = busemann_gradient_field(b, g);
  CHECK(r.max_unit_deviation <= 1e-4);
}

TEST_CASE("euclidean asymptote from an offset point is parallel to the ray") {
  const auto F = FinslerStructure::euclidean(2);
  const Ray eta(F, Vec::Zero(2), make_vec({1.0, 0.0}));
  const auto a = asymptote(eta, make_vec({0.0, 0.5}));
  REQUIRE(a.zeta.has_value());
  CHECK((a.zeta->direction() - make_vec({1.0, 0.0})).norm() < 1e-3);
}

TEST_CASE("horosphere samples sit on the level set") {
  const auto F = FinslerStructure::euclidean(2);
  const BusemannField b(Ray(F, Vec::Zero(2), make_vec({1.0, 0.0})), 1e-4);
  const auto h = horosphere_extract(b, -0.3, Grid{{make_vec({-1.0, -0.25}), make_vec({1.0, 0.25})}, {11, 5}});
  REQUIRE_FALSE(h.samples.empty());
  for (const Vec& x : h.samples) CHECK(std::abs(x[0] - 0.3) <= 1e-3);
}

TEST_CASE("minkowski Busemann Laplacian is zero") {
  const auto F = FinslerStructure::euclidean(2);
  const Ray eta(F, Vec::Zero(2), make_vec({1.0, 0.0}));
  const auto r = busemann_laplacian(eta, VolumeForm(F, VolumeKind::busemann_hausdorff), make_vec({0.2, 0.1}), 1e-4);
  CHECK(r.converged);
  CHECK(std::abs(r.value) <= 1e-3);
}
