#include "finsler/finsler.h"

#include "../harness/context.hpp"

#include "finsler/busemann.hpp"

#include <iostream>
#include <string>

struct fsl_structure {
  finsler::FinslerStructure F;
};

struct fsl_ray {
  finsler::Ray ray;
};

namespace {

using namespace finsler;

thread_local std::string g_error;

template <class Fn>
fsl_status guard(Fn&& fn) {
  g_error.clear();
  try {
    return fn();
  } catch (const FinslerError& e) {
    g_error = e.what();
    return static_cast<fsl_status>(static_cast<int>(e.code()));
  } catch (const std::bad_alloc&) {
    g_error = "out of memory";
  } catch (const std::exception& e) {
    g_error = e.what();
  } catch (...) {
    g_error = "unknown error";
  }
  return FSL_ERR_INTERNAL;
}

fsl_status invalid(const char* what) {
  g_error = what;
  return FSL_ERR_INVALID_ARGUMENT;
}

Vec vec(const double* p, int n) {
  Vec v(n);
  for (int i = 0; i < n; ++i) v[i] = p[i];
  return v;
}

void put(const Vec& v, double* out) {
  for (Eigen::Index i = 0; i < v.size(); ++i) out[i] = v[i];
}

fsl_status structure_from_config(const harness::Config& config, fsl_structure** out) {
  *out = new fsl_structure{harness::build_structure(config)};
  return FSL_OK;
}

}  // namespace

extern "C" {

const char* fsl_version(void) { return "1.0.0"; }

const char* fsl_last_error(void) { return g_error.c_str(); }

const char* fsl_status_name(fsl_status status) {
  switch (status) {
    case FSL_OK: return "ok";
    case FSL_ERR_INVALID_ARGUMENT: return "invalid argument";
    case FSL_ERR_DOMAIN: return "point outside the chart";
    case FSL_ERR_DEGENERATE_DIRECTION: return "degenerate direction";
    case FSL_ERR_METRIC: return "metric error";
    case FSL_ERR_NUMERIC: return "numeric failure";
    case FSL_ERR_SOLVER: return "solver failure";
    case FSL_ERR_UNSUPPORTED_STRUCTURE: return "unsupported structure";
    case FSL_ERR_CONFIG: return "configuration error";
    case FSL_ERR_IO: return "i/o error";
    case FSL_ERR_NOT_CONVERGED: return "not converged";
    case FSL_ERR_GEOMETRIC: return "geometric precondition violated";
    case FSL_ERR_INTERNAL: return "internal error";
  }
  return "unknown status";
}

fsl_status fsl_structure_from_text(const char* text, fsl_structure** out) {
  if (!text || !out) return invalid("null argument");
  return guard([&] {
    std::string body = text;
    auto config = harness::Config::parse(body, "<text>");
    if (!config.has_section("structure")) config = harness::Config::parse("[structure]\n" + body, "<text>");
    return structure_from_config(config, out);
  });
}

fsl_status fsl_structure_from_file(const char* path, fsl_structure** out) {
  if (!path || !out) return invalid("null argument");
  return guard([&] { return structure_from_config(harness::Config::load(path), out); });
}

fsl_status fsl_structure_custom(int dimension, fsl_norm_fn norm, void* user, int point_independent, int reversible,
                                const char* id, fsl_structure** out) {
  if (!norm || !out) return invalid("null argument");
  if (dimension < 1 || dimension > kMaxDim) return invalid("dimension out of range");
  return guard([&] {
    auto fn = [norm, user](const Vec& x, const Vec& y) {
      return norm(x.data(), y.data(), static_cast<int>(x.size()), user);
    };
    *out = new fsl_structure{FinslerStructure::custom(ManifoldChart::full(dimension), fn, point_independent != 0,
                                                      reversible != 0, id ? id : "custom")};
    return FSL_OK;
  });
}

fsl_status fsl_structure_reverse(const fsl_structure* s, fsl_structure** out) {
  if (!s || !out) return invalid("null argument");
  return guard([&] {
    *out = new fsl_structure{reverse_structure(s->F)};
    return FSL_OK;
  });
}

void fsl_structure_free(fsl_structure* s) { delete s; }

int fsl_structure_dimension(const fsl_structure* s) { return s ? s->F.dimension() : 0; }

const char* fsl_structure_id(const fsl_structure* s) { return s ? s->F.id().c_str() : ""; }

fsl_status fsl_norm(const fsl_structure* s, const double* x, const double* y, double* out) {
  if (!s || !x || !y || !out) return invalid("null argument");
  return guard([&] {
    const int n = s->F.dimension();
    *out = evaluate_norm(s->F, {vec(x, n), vec(y, n)});
    return FSL_OK;
  });
}

fsl_status fsl_fundamental_tensor(const fsl_structure* s, const double* x, const double* y, double* g) {
  if (!s || !x || !y || !g) return invalid("null argument");
  return guard([&] {
    const int n = s->F.dimension();
    const Mat m = fundamental_tensor(s->F, {vec(x, n), vec(y, n)}).matrix;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) g[i * n + j] = m(i, j);
    return FSL_OK;
  });
}

fsl_status fsl_dual_norm(const fsl_structure* s, const double* x, const double* a, double* out) {
  if (!s || !x || !a || !out) return invalid("null argument");
  return guard([&] {
    const int n = s->F.dimension();
    *out = dual_norm(s->F, {vec(x, n), vec(a, n)});
    return FSL_OK;
  });
}

fsl_status fsl_legendre(const fsl_structure* s, const double* x, const double* y, double* a) {
  if (!s || !x || !y || !a) return invalid("null argument");
  return guard([&] {
    const int n = s->F.dimension();
    put(legendre(s->F, {vec(x, n), vec(y, n)}).components, a);
    return FSL_OK;
  });
}

fsl_status fsl_inverse_legendre(const fsl_structure* s, const double* x, const double* a, double* y) {
  if (!s || !x || !a || !y) return invalid("null argument");
  return guard([&] {
    const int n = s->F.dimension();
    put(inverse_legendre(s->F, {vec(x, n), vec(a, n)}).components, y);
    return FSL_OK;
  });
}

fsl_status fsl_exp_map(const fsl_structure* s, const double* x, const double* v, double t, double* out) {
  if (!s || !x || !v || !out) return invalid("null argument");
  return guard([&] {
    const int n = s->F.dimension();
    put(exp_map(s->F, vec(x, n), vec(v, n), t), out);
    return FSL_OK;
  });
}

fsl_status fsl_distance(const fsl_structure* s, const double* p, const double* q, fsl_distance_info* out) {
  if (!s || !p || !q || !out) return invalid("null argument");
  return guard([&] {
    const int n = s->F.dimension();
    const DistanceResult r = distance(s->F, vec(p, n), vec(q, n));
    out->value = r.value;
    out->error_estimate = r.error_estimate;
    out->method = static_cast<int>(r.method);
    out->iterations = r.iterations;
    return FSL_OK;
  });
}

fsl_status fsl_ray_create(const fsl_structure* s, const double* origin, const double* direction, fsl_ray** out) {
  if (!s || !origin || !direction || !out) return invalid("null argument");
  return guard([&] {
    const int n = s->F.dimension();
    *out = new fsl_ray{Ray(s->F, vec(origin, n), vec(direction, n))};
    return FSL_OK;
  });
}

void fsl_ray_free(fsl_ray* ray) { delete ray; }

fsl_status fsl_ray_point(const fsl_ray* ray, double t, double* out) {
  if (!ray || !out) return invalid("null argument");
  if (!(t >= 0.0)) return invalid("ray parameter must be non-negative");
  return guard([&] {
    put(ray->ray.point(t), out);
    return FSL_OK;
  });
}

fsl_status fsl_busemann(const fsl_ray* ray, const double* x, double tol, double t_max, fsl_busemann_info* out) {
  if (!ray || !x || !out) return invalid("null argument");
  if (!(tol > 0.0)) return invalid("tolerance must be positive");
  return guard([&] {
    BusemannOptions o;
    if (t_max > 0.0) o.t_max = t_max;
    const BusemannEvaluation e = busemann(ray->ray, vec(x, ray->ray.structure().dimension()), tol, o);
    out->value = e.value;
    out->lower = e.lower;
    out->upper = e.upper;
    out->t_final = e.t_final;
    out->converged = e.converged ? 1 : 0;
    if (!e.converged) {
      g_error = "bracket did not close below tolerance before t_max";
      return FSL_ERR_NOT_CONVERGED;
    }
    return FSL_OK;
  });
}

fsl_status fsl_truncated_busemann(const fsl_ray* ray, double t, const double* x, double* out) {
  if (!ray || !x || !out) return invalid("null argument");
  return guard([&] {
    *out = truncated_busemann(ray->ray, t, vec(x, ray->ray.structure().dimension()));
    return FSL_OK;
  });
}

fsl_status fsl_minkowski_busemann(const fsl_structure* s, const double* v, const double* y, double* out) {
  if (!s || !v || !y || !out) return invalid("null argument");
  return guard([&] {
    const int n = s->F.dimension();
    *out = minkowski_closed_form(s->F, vec(v, n), vec(y, n));
    return FSL_OK;
  });
}

fsl_status fsl_volume_density(const fsl_structure* s, const char* kind, const double* x, double* out) {
  if (!s || !kind || !x || !out) return invalid("null argument");
  return guard([&] {
    const VolumeForm mu(s->F, volume_kind_from_string(kind));
    *out = mu.density(vec(x, s->F.dimension()));
    return FSL_OK;
  });
}

fsl_status fsl_shen_laplacian(const fsl_structure* s, const char* kind, fsl_field_fn f, void* user, const double* x,
                              double* out) {
  if (!s || !kind || !f || !x || !out) return invalid("null argument");
  return guard([&] {
    const VolumeForm mu(s->F, volume_kind_from_string(kind));
    ScalarField field;
    field.value = [f, user](const Vec& z) { return f(z.data(), static_cast<int>(z.size()), user); };
    field.name = "callback";
    *out = shen_laplacian(s->F, mu, field, vec(x, s->F.dimension())).value;
    return FSL_OK;
  });
}

fsl_status fsl_busemann_laplacian(const fsl_ray* ray, const char* kind, const double* x, double tol, double* out) {
  if (!ray || !kind || !x || !out) return invalid("null argument");
  if (!(tol > 0.0)) return invalid("tolerance must be positive");
  return guard([&] {
    const FinslerStructure& F = ray->ray.structure();
    const VolumeForm mu(F, volume_kind_from_string(kind));
    const BusemannLaplacian r = busemann_laplacian(ray->ray, mu, vec(x, F.dimension()), tol);
    *out = r.value;
    if (!r.converged) {
      g_error = "Laplacian did not settle along t-doubling: " + r.notes;
      return FSL_ERR_NOT_CONVERGED;
    }
    return FSL_OK;
  });
}

int fsl_command_run(const fsl_command_options* options) {
  if (!options || !options->command || !options->config_path) {
    g_error = "command and config path are required";
    return harness::kExitConfig;
  }
  harness::CommandOptions o;
  o.command = options->command;
  o.config_path = options->config_path;
  if (options->out_dir) o.out_dir = options->out_dir;
  if (options->argument) o.argument = options->argument;
  o.tol = options->tol;
  o.threads = options->threads;
  o.seed = options->seed;
  if (options->cache_dir) o.cache_dir = options->cache_dir;
  try {
    return harness::run_command(o, std::cerr);
  } catch (const std::exception& e) {
    g_error = e.what();
    return harness::kExitError;
  }
}

}  // extern "C"
