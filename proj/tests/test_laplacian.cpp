#include <doctest.h>

#include "finsler/fields.hpp"
#include "finsler/laplacian.hpp"

#include <cmath>

using namespace finsler;

TEST_CASE("volume densities: euclidean, hyperbolic and randers closed forms") {
  const VolumeForm e(FinslerStructure::euclidean(2), VolumeKind::busemann_hausdorff);
  CHECK(e.density(make_vec({0.4, -2.0})) == doctest::Approx(1.0));
  const VolumeForm h(FinslerStructure::hyperbolic(2), VolumeKind::busemann_hausdorff);
  CHECK(h.density(make_vec({0.0, 2.0})) == doctest::Approx(0.25));
  // Randers unit ball with |beta| = b has area pi / (1 - b^2)^(3/2); the
  // Holmes-Thompson volume of a Randers metric is the Riemannian one.
  const auto R = FinslerStructure::randers_constant(make_vec({0.3, 0.4}));
  const VolumeForm bh(R, VolumeKind::busemann_hausdorff);
  const VolumeForm ht(R, VolumeKind::holmes_thompson);
  CHECK(bh.density(Vec::Zero(2)) == doctest::Approx(std::pow(1.0 - 0.25, 1.5)).epsilon(1e-9));
  CHECK(ht.density(Vec::Zero(2)) == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("euclidean Laplacians of |x|^2/2 and |x|") {
  const auto F = FinslerStructure::euclidean(3);
  const VolumeForm mu(F, VolumeKind::busemann_hausdorff);
  const Vec x = make_vec({0.3, -0.5, 0.9});
  CHECK(shen_laplacian(F, mu, fields::half_square(3), x).value == doctest::Approx(3.0).epsilon(1e-9));
  CHECK(shen_laplacian(F, mu, fields::euclidean_radius(Vec::Zero(3)), x).value ==
        doctest::Approx(2.0 / x.norm()).epsilon(1e-7));
}

TEST_CASE("hyperbolic Laplacian of -log y is 1") {
  const auto F = FinslerStructure::hyperbolic(2);
  const VolumeForm mu(F, VolumeKind::busemann_hausdorff);
  for (const Vec& x : {make_vec({0.0, 1.0}), make_vec({0.7, 0.4}), make_vec({-2.0, 3.0})})
    CHECK(shen_laplacian(F, mu, fields::negative_log_height(2), x).value == doctest::Approx(1.0).epsilon(1e-7));
}

TEST_CASE("linear fields are harmonic on Minkowski planes") {
  const auto F = FinslerStructure::randers_constant(make_vec({0.5, 0.0}));
  const VolumeForm mu(F, VolumeKind::holmes_thompson);
  CHECK(std::abs(shen_laplacian(F, mu, fields::linear(make_vec({0.3, -1.2})), make_vec({0.1, 0.2})).value) < 1e-8);
}

TEST_CASE("zero differential yields a zero Laplacian") {
  const auto F = FinslerStructure::euclidean(2);
  const VolumeForm mu(F, VolumeKind::busemann_hausdorff);
  const auto r = shen_laplacian(F, mu, fields::half_square(2), Vec::Zero(2));
  CHECK(r.zero_differential);
  CHECK(r.value == 0.0);
}

TEST_CASE("weak and strong Laplacians agree for smooth fields") {
  const auto F = FinslerStructure::randers_constant(make_vec({0.25, 0.0}));
  const VolumeForm mu(F, VolumeKind::busemann_hausdorff);
  const Box box{make_vec({-1.0, -1.0}), make_vec({1.0, 1.0})};
  CHECK(weak_strong_gap(F, mu, fields::half_square(2), nested_bump(box, 0)) < 1e-5);
  const auto E = FinslerStructure::euclidean(2);
  const VolumeForm me(E, VolumeKind::busemann_hausdorff);
  CHECK(weak_laplacian_residual(E, me, fields::half_square(2), 2.0, box).max_residual < 1e-8);
}

TEST_CASE("level-set mean curvature of a distance function equals its Laplacian") {
  const auto F = FinslerStructure::hyperbolic(2);
  const VolumeForm mu(F, VolumeKind::busemann_hausdorff);
  const auto r = fields::distance_from(F, make_vec({0.0, 1.0}));
  const auto m = level_set_mean_curvature(F, mu, r, make_vec({0.4, 1.3}));
  CHECK(m.gap < 1e-4);
  // geodesic circle of radius s in H^2 has curvature coth(s)
  const double s = std::acosh(1.0 + (0.16 + 0.09) / (2.0 * 1.3));
  CHECK(m.laplacian == doctest::Approx(1.0 / std::tanh(s)).epsilon(1e-4));
}

TEST_CASE("harmonicity: flat presets are harmonic, the perturbed control is not") {
  const auto E = FinslerStructure::euclidean(2);
  const auto hE = harmonicity_check(E, VolumeForm(E, VolumeKind::busemann_hausdorff), Vec::Zero(2), {0.25, 0.5, 1.0}, 12);
  CHECK(hE.harmonic);
  const auto P = FinslerStructure::riemannian(ManifoldChart::full(2), make_matrix_preset("perturbed", 2, {0.5, 0.0, 0.0}));
  const auto hP = harmonicity_check(P, VolumeForm(P, VolumeKind::busemann_hausdorff), make_vec({0.5, 0.0}),
                                    {0.25, 0.5, 1.0}, 12);
  CHECK_FALSE(hP.harmonic);
  CHECK(hP.radial_deviation > 1e-2);
}

TEST_CASE("euclidean sphere curvature is 1/t and extrapolates to zero") {
  const auto F = FinslerStructure::euclidean(2);
  const auto L = horosphere_mean_curvature_limit(F, VolumeForm(F, VolumeKind::busemann_hausdorff), Vec::Zero(2),
                                                 make_vec({1.0, 0.0}), {4, 8, 16, 32});
  for (std::size_t i = 0; i < L.t.size(); ++i) CHECK(std::abs(L.curvature[i] - 1.0 / L.t[i]) < 1e-6);
  CHECK(std::abs(L.limit) < 1e-3);
}
