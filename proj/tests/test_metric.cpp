#include <doctest.h>

#include "finsler/structure.hpp"

#include <cmath>
#include <numbers>

using namespace finsler;

namespace {

// sup over sampled unit directions of a.y / F(y); an independent dual norm oracle
double brute_dual(const FinslerStructure& F, const Vec& x, const Vec& a, int samples = 100000) {
  double best = -1e300;
  for (int k = 0; k < samples; ++k) {
    const double th = 2.0 * std::numbers::pi * k / samples;
    const Vec w = make_vec({std::cos(th), std::sin(th)});
    best = std::max(best, a.dot(w) / F.norm(x, w));
  }
  return best;
}

// Hessian of F^2 / 2 in y by a plain 5-point stencil, independent of the library
Mat hessian_half_square(const FinslerStructure& F, const Vec& x, const Vec& y, double h = 1e-4) {
  const auto n = y.size();
  auto L = [&](const Vec& z) { return 0.5 * std::pow(F.norm(x, z), 2); };
  Mat H(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) {
      const Vec ei = Vec::Unit(n, i) * h, ej = Vec::Unit(n, j) * h;
      H(i, j) = (L(y + ei + ej) - L(y + ei - ej) - L(y - ei + ej) + L(y - ei - ej)) / (4 * h * h);
    }
  return H;
}

}  // namespace

TEST_CASE("euclidean norm, tensor and Legendre map are the identity") {
  const auto F = FinslerStructure::euclidean(3);
  const Vec x = make_vec({0.3, -1.0, 2.0});
  const Vec y = make_vec({1.0, 2.0, -2.0});
  CHECK(F.norm(x, y) == doctest::Approx(3.0).epsilon(1e-15));
  const auto g = fundamental_tensor(F, {x, y});
  CHECK((g.matrix - Mat::Identity(3, 3)).norm() < 1e-14);
  CHECK((legendre(F, {x, y}).components - y).norm() < 1e-14);
  CHECK(dual_norm(F, {x, y}) == doctest::Approx(3.0));
}

TEST_CASE("randers constant: norm, nonsymmetry and dual norm against brute force") {
  const Vec beta = make_vec({0.5, 0.0});
  const auto F = FinslerStructure::randers_constant(beta);
  const Vec x = Vec::Zero(2);
  const Vec y = make_vec({0.6, 0.8});
  CHECK(F.norm(x, y) == doctest::Approx(1.3));
  CHECK(F.norm(x, -y) == doctest::Approx(0.7));
  for (const Vec& a : {make_vec({1.0, 0.0}), make_vec({0.2, -0.7}), make_vec({-1.0, 0.5})})
    CHECK(dual_norm(F, {x, a}) == doctest::Approx(brute_dual(F, x, a)).epsilon(1e-8));
}

TEST_CASE("randers fundamental tensor matches a stencil Hessian of F^2/2") {
  for (double b : {0.25, 0.5, 0.75}) {
    const auto F = FinslerStructure::randers_constant(make_vec({0.0, b}));
    const Vec x = Vec::Zero(2);
    for (const Vec& y : {make_vec({1.0, 0.0}), make_vec({-0.3, 0.9}), make_vec({0.2, -2.0})}) {
      const Mat g = fundamental_tensor(F, {x, y}).matrix;
      CHECK((g - hessian_half_square(F, x, y)).norm() < 1e-5);
    }
  }
}

TEST_CASE("randers with |beta| >= 1 is rejected") {
  CHECK_THROWS_AS(FinslerStructure::randers_constant(make_vec({1.2, 0.0})), MetricError);
}

TEST_CASE("hyperbolic norm is |v| / y") {
  const auto F = FinslerStructure::hyperbolic(2);
  CHECK(F.norm(make_vec({3.0, 0.5}), make_vec({0.3, 0.4})) == doctest::Approx(1.0));
  CHECK_THROWS_AS(F.norm(make_vec({0.0, -1.0}), make_vec({1.0, 0.0})), DomainError);
}

TEST_CASE("quartic custom norm: Legendre map equals y^3 / F^2") {
  const auto F = FinslerStructure::custom_preset("quartic", 2, {});
  CHECK(F.provider() == DerivativeProvider::finite_difference);
  const Vec x = Vec::Zero(2);
  for (const Vec& y : {make_vec({1.0, 0.5}), make_vec({-0.4, 1.3}), make_vec({2.0, -2.0})}) {
    const double F2 = std::sqrt(y.array().pow(4).sum());
    const Vec expected = y.array().pow(3) / F2;
    CHECK((legendre(F, {x, y}).components - expected).norm() < 1e-9 * expected.norm());
    const Vec back = inverse_legendre(F, {x, expected}).components;
    CHECK((back - y).norm() < 1e-8 * y.norm());
  }
}

TEST_CASE("homogeneity, Euler identity and positive definiteness on sampled directions") {
  const std::vector<FinslerStructure> all = {
      FinslerStructure::euclidean(2), FinslerStructure::randers_constant(make_vec({0.3, -0.4})),
      FinslerStructure::custom_preset("quartic", 2, {}), FinslerStructure::hyperbolic(2),
      FinslerStructure::custom_preset("swirl-randers", 2, {0.5})};
  for (const auto& F : all) {
    Rng rng(7);
    for (int k = 0; k < 50; ++k) {
      const Vec x = sample_chart_point(F.chart(), rng);
      const Vec y = rng.direction(2) * rng.uniform(0.1, 3.0);
      const double l = rng.uniform(0.01, 10.0);
      const double Fy = F.norm(x, y);
      CHECK(std::abs(F.norm(x, l * y) - l * Fy) <= 1e-9 * l * Fy);
      const Mat g = fundamental_tensor(F, {x, y}).matrix;
      CHECK(std::abs(y.dot(g * y) - Fy * Fy) <= 1e-8 * Fy * Fy);
      Eigen::SelfAdjointEigenSolver<Mat> eig(g);
      CHECK(eig.eigenvalues().minCoeff() > 0.0);
    }
  }
}

TEST_CASE("reverse structure flips the direction") {
  const auto F = FinslerStructure::randers_constant(make_vec({0.5, 0.0}));
  const auto R = reverse_structure(F);
  const Vec x = Vec::Zero(2), y = make_vec({1.0, 0.2});
  CHECK(R.norm(x, y) == doctest::Approx(F.norm(x, -y)));
}

TEST_CASE("gradient of a field vanishes below the zero-differential threshold") {
  const auto F = FinslerStructure::euclidean(2);
  ScalarField flat;
  flat.value = [](const Vec&) { return 1.0; };
  flat.differential = [](const Vec& x) { return Vec(Vec::Constant(x.size(), 1e-12)); };
  CHECK(gradient(flat, F, Vec::Zero(2)).components.norm() == 0.0);
}

TEST_CASE("screening reports a passing structure") {
  const auto r = screen_structure(FinslerStructure::randers_constant(make_vec({0.25, 0.0})), 30, 1);
  CHECK(r.passed);
  CHECK(r.min_eigenvalue > 0.0);
}
