#ifndef LOBSIM_H
#define LOBSIM_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#  if defined(LOBSIM_BUILDING_LIBRARY)
#    define LOBSIM_API __declspec(dllexport)
#  else
#    define LOBSIM_API __declspec(dllimport)
#  endif
#else
#  define LOBSIM_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum lobsim_status {
  LOBSIM_OK = 0,
  LOBSIM_INVALID_ARGUMENT = 1,
  LOBSIM_NON_POSITIVE_RATE = 2,
  LOBSIM_BAD_RESET_DISTRIBUTION = 3,
  LOBSIM_NSTAR_TOO_SMALL = 4,
  LOBSIM_START_ON_BOUNDARY = 5,
  LOBSIM_CONFIG_ERROR = 6,
  LOBSIM_IO_ERROR = 7,
  LOBSIM_EIGEN_SOLVER_FAILURE = 8,
  LOBSIM_BISECTION_NO_CONVERGENCE = 9,
  LOBSIM_INTERNAL_CONSISTENCY = 10,
  LOBSIM_OUT_OF_MEMORY = 11,
  LOBSIM_UNKNOWN_ERROR = 12
} lobsim_status;

typedef enum lobsim_engine { LOBSIM_ENGINE_FAST = 0, LOBSIM_ENGINE_ORACLE = 1 } lobsim_engine;

typedef enum lobsim_side { LOBSIM_SIDE_BID = 0, LOBSIM_SIDE_ASK = 1 } lobsim_side;

typedef struct lobsim_params {
  double lambda;
  double mu;
  double theta;
  double alpha;
  int n_star;
  const double* reset_dist; /* NULL means uniform on 1..n_star */
  size_t reset_len;
} lobsim_params;

typedef struct lobsim_state {
  int bid;
  int ask;
  int spread;
} lobsim_state;

typedef struct lobsim_spectrum_diagnostics {
  double symmetry_residual;
  double orthonormality_residual;
  double eigen_residual;
  double max_eigenvalue;
  double min_decay_rate;
} lobsim_spectrum_diagnostics;

typedef struct lobsim_recurrence {
  double p_one;
  double p_nstar;
  double theta;
  int regime; /* 0 distinct roots, 1 double root, 2 oscillatory */
  int condition_ok;
  int p_one_lt_half;
} lobsim_recurrence;

typedef struct lobsim_horizon_summary {
  double horizon;
  size_t n_paths;
  double drift_rate, drift_rate_se;
  double var_rate, var_rate_se;
  double mean_duration, mean_duration_se;
  size_t paths_without_change;
  double occupancy[4];
  double occupancy_se[4];
  double skewness, skewness_se;
  double excess_kurtosis, excess_kurtosis_se;
  double ks_distance;
} lobsim_horizon_summary;

typedef struct lobsim_fclt {
  double ratio, ratio_se, ratio_lo, ratio_hi;
  int ratio_contains_one;
  double drift_diff, drift_diff_se;
  int drift_contains_zero;
} lobsim_fclt;

typedef struct lobsim_model lobsim_model;
typedef struct lobsim_path lobsim_path;
typedef struct lobsim_study lobsim_study;

/* Message of the last failed call on this thread; "" if none. */
LOBSIM_API const char* lobsim_last_error(void);
LOBSIM_API const char* lobsim_status_name(lobsim_status status);
/* Nonzero for solver / consistency failures as opposed to bad input. */
LOBSIM_API int lobsim_status_is_numerical(lobsim_status status);

/* Model: validated parameters plus the eigen-decomposition. */
LOBSIM_API lobsim_status lobsim_model_create(const lobsim_params* params, lobsim_model** out);
/* Loads a key=value config. `initial` receives x0_bid/x0_ask/spread0 when present;
   `has_initial` is set to 0 or 1. Either pointer may be NULL. */
LOBSIM_API lobsim_status lobsim_model_from_config(const char* path, lobsim_model** out,
                                                  lobsim_state* initial, int* has_initial);
LOBSIM_API void lobsim_model_destroy(lobsim_model* model);

LOBSIM_API int lobsim_model_n_star(const lobsim_model* model);
LOBSIM_API int lobsim_model_recurrence_ok(const lobsim_model* model);
LOBSIM_API size_t lobsim_spectrum_size(const lobsim_model* model);
/* Copies min(capacity, size) eigenvalues, ascending. */
LOBSIM_API lobsim_status lobsim_spectrum_eigenvalues(const lobsim_model* model, double* out,
                                                     size_t capacity);
LOBSIM_API lobsim_status lobsim_spectrum_decay_rates(const lobsim_model* model, double* out,
                                                     size_t capacity);
LOBSIM_API lobsim_status lobsim_spectrum_diagnose(const lobsim_model* model,
                                                  lobsim_spectrum_diagnostics* out);

/* Closed-form laws. t may be INFINITY where noted. */
LOBSIM_API lobsim_status lobsim_u_joint(const lobsim_model* model, double t, int bid, int ask,
                                        lobsim_side depleted, int survivor, double* out);
LOBSIM_API lobsim_status lobsim_survival_kernel(const lobsim_model* model, double t, int bid,
                                                int ask, int at_bid, int at_ask, double* out);
LOBSIM_API lobsim_status lobsim_tau_cdf(const lobsim_model* model, double t, lobsim_state state,
                                        double* out);
LOBSIM_API lobsim_status lobsim_tau_density(const lobsim_model* model, double t,
                                            lobsim_state state, double* out);
/* CSV t,survival,density over the given grid. */
LOBSIM_API lobsim_status lobsim_tau_curves_write_csv(const lobsim_model* model, lobsim_state state,
                                                     const double* grid, size_t n,
                                                     const char* path);
LOBSIM_API lobsim_status lobsim_prob_up(const lobsim_model* model, lobsim_state state,
                                        double* out);
LOBSIM_API lobsim_status lobsim_prob_two_up(const lobsim_model* model, lobsim_state state,
                                            double* out);
LOBSIM_API lobsim_status lobsim_recurrence_report(const lobsim_model* model,
                                                  lobsim_recurrence* out);

/* Writers take a file path; "-" writes to stdout. */

/* Single path simulation. `event_log_path` (oracle engine only, may be NULL)
   receives the per-event CSV. */
LOBSIM_API lobsim_status lobsim_simulate(const lobsim_model* model, lobsim_engine engine,
                                         lobsim_state initial, double horizon, uint64_t seed,
                                         const char* event_log_path, lobsim_path** out);
LOBSIM_API void lobsim_path_destroy(lobsim_path* path);
LOBSIM_API size_t lobsim_path_changes(const lobsim_path* path);
LOBSIM_API int64_t lobsim_path_final_mid(const lobsim_path* path);
LOBSIM_API lobsim_status lobsim_path_epoch(const lobsim_path* path, size_t index, double* time,
                                           int64_t* mid, lobsim_state* state);
LOBSIM_API lobsim_status lobsim_path_occupancy(const lobsim_path* path, double out[4]);
LOBSIM_API lobsim_status lobsim_path_write_csv(const lobsim_path* path, const char* file);

/* Monte Carlo study over increasing horizons. */
LOBSIM_API lobsim_status lobsim_study_run(const lobsim_model* model, lobsim_engine engine,
                                          lobsim_state initial, const double* horizons,
                                          size_t n_horizons, size_t n_paths, uint64_t seed,
                                          unsigned workers, lobsim_study** out);
LOBSIM_API void lobsim_study_destroy(lobsim_study* study);
LOBSIM_API size_t lobsim_study_horizon_count(const lobsim_study* study);
LOBSIM_API lobsim_status lobsim_study_horizon(const lobsim_study* study, size_t index,
                                              lobsim_horizon_summary* out);
LOBSIM_API lobsim_status lobsim_study_write_json(const lobsim_study* study, const char* file);
LOBSIM_API lobsim_status lobsim_study_write_csv(const lobsim_study* study, const char* file);
LOBSIM_API lobsim_status lobsim_study_write_density_csv(const lobsim_study* study, size_t index,
                                                        const char* file);
LOBSIM_API lobsim_status lobsim_study_write_occupancy_csv(const lobsim_study* study, size_t index,
                                                          const char* file);
LOBSIM_API lobsim_status lobsim_study_fclt(const lobsim_study* study, size_t shorter,
                                           size_t longer, lobsim_fclt* out);

#ifdef __cplusplus
}
#endif

#endif
