#include <doctest.h>

#include "finsler/finsler.h"

#include <cmath>
#include <cstring>
#include <filesystem>
#include <string>

namespace {

double l1_norm(const double*, const double* y, int n, void*) {
  double s = 0.0;
  for (int i = 0; i < n; ++i) s += std::abs(y[i]) + 0.1 * y[i] * y[i] / std::sqrt(y[0] * y[0] + y[1] * y[1]);
  return s;
}

double square(const double* x, int n, void*) {
  double s = 0.0;
  for (int i = 0; i < n; ++i) s += 0.5 * x[i] * x[i];
  return s;
}

}  // namespace

TEST_CASE("structures from text and their norms") {
  fsl_structure* s = nullptr;
  REQUIRE(fsl_structure_from_text("family = randers\ndimension = 2\nbeta = 0.3 0\n", &s) == FSL_OK);
  CHECK(fsl_structure_dimension(s) == 2);
  const double x[2] = {0, 0}, y[2] = {1, 0}, ym[2] = {-1, 0};
  double f = 0;
  CHECK(fsl_norm(s, x, y, &f) == FSL_OK);
  CHECK(f == doctest::Approx(1.3));
  CHECK(fsl_norm(s, x, ym, &f) == FSL_OK);
  CHECK(f == doctest::Approx(0.7));

  fsl_structure* r = nullptr;
  REQUIRE(fsl_structure_reverse(s, &r) == FSL_OK);
  CHECK(fsl_norm(r, x, y, &f) == FSL_OK);
  CHECK(f == doctest::Approx(0.7));

  double a[2], back[2];
  CHECK(fsl_legendre(s, x, y, a) == FSL_OK);
  CHECK(fsl_inverse_legendre(s, x, a, back) == FSL_OK);
  CHECK(back[0] == doctest::Approx(1.0));
  CHECK(std::abs(back[1]) < 1e-9);

  fsl_distance_info info{};
  const double q[2] = {2, 0};
  CHECK(fsl_distance(s, x, q, &info) == FSL_OK);
  CHECK(info.value == doctest::Approx(2.6));
  fsl_structure_free(r);
  fsl_structure_free(s);
}

TEST_CASE("errors map to status codes with a message") {
  fsl_structure* s = nullptr;
  CHECK(fsl_structure_from_text("family = randers\ndimension = 2\nbeta = 1.5 0\n", &s) != FSL_OK);
  CHECK(std::strlen(fsl_last_error()) > 0);
  CHECK(fsl_structure_from_text("family = euclidean\n", &s) == FSL_ERR_CONFIG);
  CHECK(std::string(fsl_last_error()).find("dimension") != std::string::npos);
  CHECK(fsl_norm(nullptr, nullptr, nullptr, nullptr) == FSL_ERR_INVALID_ARGUMENT);

  REQUIRE(fsl_structure_from_text("family = riemannian\ndimension = 2\nmetric = hyperbolic\n", &s) == FSL_OK);
  const double below[2] = {0, -1}, y[2] = {1, 0};
  double f;
  CHECK(fsl_norm(s, below, y, &f) == FSL_ERR_DOMAIN);
  CHECK(std::string(fsl_status_name(FSL_ERR_DOMAIN)) == "point outside the chart");
  fsl_structure_free(s);
}

TEST_CASE("busemann through the C interface") {
  fsl_structure* s = nullptr;
  REQUIRE(fsl_structure_from_text("family = euclidean\ndimension = 2\n", &s) == FSL_OK);
  const double o[2] = {0, 0}, v[2] = {1, 0}, x[2] = {0.4, 0.3};
  fsl_ray* ray = nullptr;
  REQUIRE(fsl_ray_create(s, o, v, &ray) == FSL_OK);
  fsl_busemann_info info{};
  CHECK(fsl_busemann(ray, x, 1e-4, 0, &info) == FSL_OK);
  CHECK(info.converged == 1);
  CHECK(std::abs(info.value + 0.4) <= 1e-4);
  CHECK(fsl_busemann(ray, x, 1e-8, 2.0, &info) == FSL_ERR_NOT_CONVERGED);
  CHECK(info.converged == 0);
  double b;
  CHECK(fsl_minkowski_busemann(s, v, x, &b) == FSL_OK);
  CHECK(b == doctest::Approx(-0.4));
  double lap;
  CHECK(fsl_shen_laplacian(s, "busemann-hausdorff", square, nullptr, x, &lap) == FSL_OK);
  CHECK(lap == doctest::Approx(2.0));
  fsl_ray_free(ray);
  fsl_structure_free(s);
}

TEST_CASE("custom norm callback") {
  fsl_structure* s = nullptr;
  REQUIRE(fsl_structure_custom(2, l1_norm, nullptr, 1, 1, "smooth-l1", &s) == FSL_OK);
  const double x[2] = {0, 0}, y[2] = {3, 4};
  double f;
  CHECK(fsl_norm(s, x, y, &f) == FSL_OK);
  CHECK(f == doctest::Approx(7.0 + 0.1 * 25.0 / 5.0));
  fsl_structure_free(s);
}

TEST_CASE("command run reports a config error") {
  fsl_command_options o{};
  o.command = "eval";
  o.config_path = "/nonexistent/finsler.cfg";
  const std::string out = (std::filesystem::temp_directory_path() / "finsler_capi_test").string();
  o.out_dir = out.c_str();
  CHECK(fsl_command_run(&o) == 2);
  o.command = nullptr;
  CHECK(fsl_command_run(&o) == 2);
}
