#ifndef GNSFDE_H
#define GNSFDE_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

#if defined(GNSFDE_BUILDING)
#define GN_API __attribute__((visibility("default")))
#else
#define GN_API
#endif

typedef enum gn_status {
    GN_OK = 0,
    GN_ERR_DOMAIN = 1,
    GN_ERR_CONFIG = 2,
    GN_ERR_INPUT = 3,
    GN_ERR_USAGE = 4,
    GN_ERR_STEP = 5,
    GN_ERR_DIVERGENCE = 6,
    GN_ERR_ESTIMATION = 7,
    GN_ERR_INTERNAL = 8
} gn_status;

typedef struct gn_grid gn_grid;
typedef struct gn_path gn_path;
typedef struct gn_coeffs gn_coeffs;
typedef struct gn_policy gn_policy;
typedef struct gn_gbm gn_gbm;

typedef enum gn_coeff_kind { GN_COEFF_POINTWISE = 0, GN_COEFF_INTEGRAL = 1, GN_COEFF_AFFINE = 2 } gn_coeff_kind;

/* One coefficient: (c0 + c1 u) * base + c2 u, clamped to [-clamp, clamp] when has_clamp. */
typedef struct gn_coeff_spec {
    gn_coeff_kind kind;
    double scale;
    double offset;
    double c0, c1, c2;
    int has_clamp;
    double clamp;
} gn_coeff_spec;

GN_API const char* gn_version(void);
GN_API const char* gn_status_string(gn_status status);

/* Details of the last failure on the calling thread. */
GN_API const char* gn_last_error(void);
/* Config field path of the last failure, or "" if none. */
GN_API const char* gn_last_error_field(void);
/* Grid node index of the last failure, or -1 if none. */
GN_API long long gn_last_error_step(void);

GN_API gn_status gn_g_of(double a, double sigma_min, double sigma_max, double* out);
GN_API gn_status gn_gnormal_cdf(double y, double sigma_min, double sigma_max, double t, double dx, double* out);
/* cdf and density must hold n values each. */
GN_API gn_status gn_gnormal_table(double sigma_min, double sigma_max, double t, double dx, const double* y, size_t n,
                                  double* cdf, double* density);

GN_API gn_status gn_grid_create(double tau, double horizon, size_t steps, gn_grid** out);
GN_API void gn_grid_destroy(gn_grid* grid);
GN_API double gn_grid_step(const gn_grid* grid);
GN_API size_t gn_grid_size(const gn_grid* grid);
GN_API size_t gn_grid_zero_index(const gn_grid* grid);
GN_API double gn_grid_time(const gn_grid* grid, size_t k);

GN_API gn_status gn_path_create(const gn_grid* grid, const double* values, size_t n, gn_path** out);
GN_API void gn_path_destroy(gn_path* path);
GN_API size_t gn_path_size(const gn_path* path);
GN_API gn_status gn_path_values(const gn_path* path, double* out, size_t n);
GN_API gn_status gn_segment_eval(const gn_path* path, size_t anchor, double lambda, double* out);
GN_API gn_status gn_segment_integral(const gn_path* path, size_t anchor, double* out);

GN_API gn_status gn_coeffs_create(const gn_coeff_spec* q, const gn_coeff_spec* b, const gn_coeff_spec* gamma,
                                  const gn_coeff_spec* sigma, double tau, gn_coeffs** out);
GN_API gn_status gn_coeffs_example(double tau, gn_coeffs** out);
GN_API void gn_coeffs_destroy(gn_coeffs* coeffs);
GN_API gn_status gn_coeffs_lipschitz(const gn_coeffs* coeffs, double* k1, double* k0, double* contraction);

GN_API gn_status gn_policy_constant(double rate, double sigma_min, double sigma_max, gn_policy** out);
GN_API void gn_policy_destroy(gn_policy* policy);

GN_API gn_status gn_gbm_sample(const gn_policy* policy, const gn_grid* grid, uint64_t seed, gn_gbm** out);
GN_API void gn_gbm_destroy(gn_gbm* gbm);
/* Number of forward nodes M + 1. */
GN_API size_t gn_gbm_size(const gn_gbm* gbm);
/* b and qv must hold gn_gbm_size values each; either may be NULL. */
GN_API gn_status gn_gbm_values(const gn_gbm* gbm, double* b, double* qv, size_t n);
GN_API gn_status gn_gbm_qv_residual(const gn_gbm* gbm, double* out);

/* Uncontrolled Euler-Maruyama solution with initial history eta. */
GN_API gn_status gn_simulate(const gn_coeffs* coeffs, const gn_path* eta, const gn_gbm* gbm, gn_path** out);

/* Run a CLI command. overrides_json may be NULL; config_path and preset may be NULL. */
GN_API gn_status gn_run_command(const char* command, const char* config_path, const char* preset,
                                const char* overrides_json, const char* out_dir);
/* Effective config of a command as JSON. Writes at most cap bytes (NUL included) and stores the
   full length in *needed; call with cap = 0 to size the buffer. */
GN_API gn_status gn_effective_config(const char* command, const char* config_path, const char* preset,
                                     const char* overrides_json, char* buf, size_t cap, size_t* needed);
/* Newline-separated names. */
GN_API const char* gn_preset_names(void);
GN_API const char* gn_command_names(void);

#ifdef __cplusplus
}
#endif

#endif
