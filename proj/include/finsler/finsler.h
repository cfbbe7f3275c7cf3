#ifndef FINSLER_FINSLER_H
#define FINSLER_FINSLER_H

/* C interface to the finsler library. All functions return a status code;
 * on failure fsl_last_error() describes the problem for the calling thread.
 * Vectors are passed as arrays of length fsl_structure_dimension(). */

#ifdef __cplusplus
extern "C" {
#endif

#if defined(_WIN32)
#define FSL_API __declspec(dllexport)
#else
#define FSL_API __attribute__((visibility("default")))
#endif

typedef enum fsl_status {
  FSL_OK = 0,
  FSL_ERR_INVALID_ARGUMENT = 1,
  FSL_ERR_DOMAIN = 2,
  FSL_ERR_DEGENERATE_DIRECTION = 3,
  FSL_ERR_METRIC = 4,
  FSL_ERR_NUMERIC = 5,
  FSL_ERR_SOLVER = 6,
  FSL_ERR_UNSUPPORTED_STRUCTURE = 7,
  FSL_ERR_CONFIG = 8,
  FSL_ERR_IO = 9,
  FSL_ERR_NOT_CONVERGED = 10,
  FSL_ERR_GEOMETRIC = 11,
  FSL_ERR_INTERNAL = 99
} fsl_status;

typedef struct fsl_structure fsl_structure;
typedef struct fsl_ray fsl_ray;

FSL_API const char* fsl_version(void);
/* Message of the last failed call on this thread; empty after success. */
FSL_API const char* fsl_last_error(void);
FSL_API const char* fsl_status_name(fsl_status status);

/* Structures. The text form is the [structure] section of a scenario config. */
FSL_API fsl_status fsl_structure_from_text(const char* text, fsl_structure** out);
FSL_API fsl_status fsl_structure_from_file(const char* path, fsl_structure** out);

typedef double (*fsl_norm_fn)(const double* x, const double* y, int n, void* user);
/* Norm supplied by the caller; derivatives by finite differences. The callback
 * must be thread-safe and outlive the structure. */
FSL_API fsl_status fsl_structure_custom(int dimension, fsl_norm_fn norm, void* user, int point_independent,
                                        int reversible, const char* id, fsl_structure** out);
FSL_API fsl_status fsl_structure_reverse(const fsl_structure* s, fsl_structure** out);
FSL_API void fsl_structure_free(fsl_structure* s);
FSL_API int fsl_structure_dimension(const fsl_structure* s);
FSL_API const char* fsl_structure_id(const fsl_structure* s);

/* Pointwise metric quantities. g is n*n row-major. */
FSL_API fsl_status fsl_norm(const fsl_structure* s, const double* x, const double* y, double* out);
FSL_API fsl_status fsl_fundamental_tensor(const fsl_structure* s, const double* x, const double* y, double* g);
FSL_API fsl_status fsl_dual_norm(const fsl_structure* s, const double* x, const double* a, double* out);
FSL_API fsl_status fsl_legendre(const fsl_structure* s, const double* x, const double* y, double* a);
FSL_API fsl_status fsl_inverse_legendre(const fsl_structure* s, const double* x, const double* a, double* y);

/* Geodesics and distance. */
FSL_API fsl_status fsl_exp_map(const fsl_structure* s, const double* x, const double* v, double t, double* out);

typedef struct fsl_distance_info {
  double value;
  double error_estimate;
  int method; /* 0 closed form, 1 shooting, 2 lattice fallback */
  int iterations;
} fsl_distance_info;

FSL_API fsl_status fsl_distance(const fsl_structure* s, const double* p, const double* q, fsl_distance_info* out);

/* Rays. The direction is normalized to unit speed. */
FSL_API fsl_status fsl_ray_create(const fsl_structure* s, const double* origin, const double* direction,
                                  fsl_ray** out);
FSL_API void fsl_ray_free(fsl_ray* ray);
FSL_API fsl_status fsl_ray_point(const fsl_ray* ray, double t, double* out);

typedef struct fsl_busemann_info {
  double value;
  double lower;
  double upper;
  double t_final;
  int converged;
} fsl_busemann_info;

/* t_max <= 0 selects the default 2^14. Returns FSL_ERR_NOT_CONVERGED with
 * `out` filled when the bracket does not close. */
FSL_API fsl_status fsl_busemann(const fsl_ray* ray, const double* x, double tol, double t_max,
                                fsl_busemann_info* out);
FSL_API fsl_status fsl_truncated_busemann(const fsl_ray* ray, double t, const double* x, double* out);
FSL_API fsl_status fsl_minkowski_busemann(const fsl_structure* s, const double* v, const double* y, double* out);

/* Volume forms: kind is "busemann-hausdorff" or "holmes-thompson". */
FSL_API fsl_status fsl_volume_density(const fsl_structure* s, const char* kind, const double* x, double* out);

typedef double (*fsl_field_fn)(const double* x, int n, void* user);
/* Shen's Laplacian of a caller-supplied field; derivatives by finite differences. */
FSL_API fsl_status fsl_shen_laplacian(const fsl_structure* s, const char* kind, fsl_field_fn f, void* user,
                                      const double* x, double* out);
/* Laplacian of the Busemann function of a ray at x, certified along t-doubling. */
FSL_API fsl_status fsl_busemann_laplacian(const fsl_ray* ray, const char* kind, const double* x, double tol,
                                          double* out);

/* Scenario commands (the CLI front end). Returns the process exit code:
 * 0 success, 1 verification failure, 2 config error, 3 Busemann
 * non-convergence, 4 unwritable cache, 5 other runtime error. */
typedef struct fsl_command_options {
  const char* command;     /* eval, geodesic, distance, busemann, horosphere, laplacian, harmonic, ahf, verify, cache */
  const char* config_path; /* required */
  const char* out_dir;     /* NULL selects the current directory */
  const char* argument;    /* verify suite or cache action; NULL for the config default */
  double tol;              /* <= 0 keeps the config value */
  int threads;             /* <= 0 keeps the config value */
  unsigned long long seed;
  const char* cache_dir;   /* NULL keeps the config value */
} fsl_command_options;

FSL_API int fsl_command_run(const fsl_command_options* options);

#ifdef __cplusplus
}
#endif

#endif
