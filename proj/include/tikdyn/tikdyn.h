#ifndef TIKDYN_TIKDYN_H
#define TIKDYN_TIKDYN_H

#include <stddef.h>

#if defined(_WIN32)
#define TKD_API __declspec(dllexport)
#else
#define TKD_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum tkd_status {
  TKD_OK = 0,
  TKD_INVALID_PARAMETER = 1,
  TKD_UNSUPPORTED_OBJECTIVE = 2,
  TKD_WRONG_BRANCH = 3,
  TKD_PRECONDITION = 4,
  TKD_ABORTED_RUN = 5,
  TKD_INSUFFICIENT_DATA = 6,
  TKD_DOMAIN = 7,
  TKD_IO = 8,
  TKD_CONFIG = 9,
  TKD_INFEASIBLE = 10,
  TKD_NULL_ARGUMENT = 11,
  TKD_INTERNAL = 12
} tkd_status;

typedef struct tkd_objective tkd_objective;
typedef struct tkd_schedule tkd_schedule;
typedef struct tkd_trajectory tkd_trajectory;
typedef struct tkd_string tkd_string;

/* Message of the last failing call on this thread ("" if none). */
TKD_API const char* tkd_last_error(void);
TKD_API const char* tkd_status_name(tkd_status status);

/* Objectives: "abs", "abs_quad", "dead_zone", "shifted_abs", "quadratic". */
TKD_API tkd_status tkd_objective_create(const char* name, size_t dimension, tkd_objective** out);
TKD_API void tkd_objective_destroy(tkd_objective* f);
TKD_API tkd_status tkd_objective_dimension(const tkd_objective* f, size_t* out);
TKD_API tkd_status tkd_objective_value(const tkd_objective* f, const double* x, double* out);
TKD_API tkd_status tkd_objective_minimal_norm_point(const tkd_objective* f, double* out);

/* Vectors are arrays of objective dimension. */
TKD_API tkd_status tkd_prox(const tkd_objective* f, double s, const double* x, double* out);
TKD_API tkd_status tkd_numeric_prox(const tkd_objective* f, double s, const double* x,
                                    double* out);
TKD_API tkd_status tkd_moreau_value(const tkd_objective* f, double lambda, const double* x,
                                    double* out);
TKD_API tkd_status tkd_moreau_grad(const tkd_objective* f, double lambda, const double* x,
                                   double* out);
TKD_API tkd_status tkd_regularized_min(const tkd_objective* f, double epsilon, double lambda,
                                       double* point, double* reg_value);

/* lambda = t^l, eps = t^-d */
TKD_API tkd_status tkd_schedule_polynomial(double l, double d, tkd_schedule** out);
/* "no_tikhonov" (damping eps = t^-d, no Tikhonov term) or "log_tikhonov". */
TKD_API tkd_status tkd_schedule_named(const char* name, double l, double d, tkd_schedule** out);
TKD_API void tkd_schedule_destroy(tkd_schedule* s);
TKD_API tkd_status tkd_schedule_eval(const tkd_schedule* s, double t, double* lambda,
                                     double* lambda_dot, double* eps, double* eps_dot);

TKD_API int tkd_polynomial_feasible(double l, double d);
TKD_API tkd_status tkd_gamma_feasible_range(double alpha, double* lo, double* hi,
                                            int* lo_inclusive);

typedef struct tkd_solver_params {
  double alpha;
  double beta;
  double t0;
  double horizon;
  double step;
  size_t stride;
} tkd_solver_params;

/* alpha 10, beta 1, t0 1, horizon 1000, step 1e-3, stride 100 */
TKD_API tkd_solver_params tkd_solver_defaults(void);

/* On TKD_ABORTED_RUN *out still receives the records written before the
   failure; the caller owns it either way. */
TKD_API tkd_status tkd_integrate(const tkd_solver_params* params, const tkd_objective* f,
                                 const tkd_schedule* s, const double* x0, const double* v0,
                                 tkd_trajectory** out);
TKD_API void tkd_trajectory_destroy(tkd_trajectory* traj);
TKD_API tkd_status tkd_trajectory_size(const tkd_trajectory* traj, size_t* out);
TKD_API size_t tkd_trajectory_warning_count(const tkd_trajectory* traj);
/* Copies up to capacity values of a named column; *count gets the full length. */
TKD_API tkd_status tkd_trajectory_column(const tkd_trajectory* traj, const char* name,
                                         double* out, size_t capacity, size_t* count);
TKD_API tkd_status tkd_trajectory_write_csv(const tkd_trajectory* traj, const char* path);

typedef struct tkd_rate_fit {
  double t_lo;
  double t_hi;
  double slope;
  double intercept;
  double r_squared;
  size_t samples;
} tkd_rate_fit;

/* Log-log least squares on [t_lo, t_hi]; t_lo = t_hi = 0 picks the last decade. */
TKD_API tkd_status tkd_rate_fit_series(const double* t, const double* values, size_t n,
                                       double t_lo, double t_hi, tkd_rate_fit* out);
TKD_API tkd_status tkd_fit_csv(const char* path, const char* column, double t_lo, double t_hi,
                               tkd_rate_fit* out);

/* workers == 0 keeps the config value; output_dir NULL keeps the config value.
   *report receives the condition report and per-point log. */
TKD_API tkd_status tkd_run_config(const char* config_path, size_t workers, int allow_infeasible,
                                  const char* output_dir, tkd_string** report);
/* *runnable is 1 when every swept pair satisfies the polynomial conditions
   or the config sets allow_infeasible. */
TKD_API tkd_status tkd_check_config(const char* config_path, tkd_string** report, int* runnable);

TKD_API const char* tkd_string_data(const tkd_string* s);
TKD_API void tkd_string_destroy(tkd_string* s);

#ifdef __cplusplus
}
#endif

#endif /* TIKDYN_TIKDYN_H */
