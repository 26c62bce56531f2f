#ifndef RIDGELAB_RIDGELAB_H
#define RIDGELAB_RIDGELAB_H

#include <stddef.h>
#include <stdint.h>

#if defined(RIDGELAB_BUILDING_LIBRARY)
#define RL_API __attribute__((visibility("default")))
#else
#define RL_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum rl_status {
  RL_OK = 0,
  RL_INVALID_ARGUMENT = 1,
  RL_DOMAIN_ERROR = 2,
  RL_RANK_DEFICIENT = 3,
  RL_NUMERICAL_FAILURE = 4,
  RL_DIMENSION_TOO_LARGE = 5,
  RL_NUMERICAL_UNDERFLOW = 6,
  RL_CONFIG_ERROR = 7,
  RL_INTERNAL_ERROR = 8
} rl_status;

/* Message of the last failed call on this thread; empty after success. */
RL_API const char* rl_last_error(void);
RL_API const char* rl_status_string(rl_status status);
RL_API const char* rl_version(void);

typedef enum rl_sphere_mode {
  RL_SPHERE_AUTO = 0,
  RL_SPHERE_QUADRATURE = 1,
  RL_SPHERE_MONTE_CARLO = 2
} rl_sphere_mode;

typedef struct rl_options {
  unsigned workers;
  rl_sphere_mode sphere_mode;
  int sphere_nodes;
  int64_t sphere_mc_samples;
} rl_options;

RL_API void rl_options_init(rl_options* options);

typedef struct rl_risk_estimate {
  double mean;
  double std_error;
  uint64_t reps;
  uint64_t seed;
  uint64_t resampled;
} rl_risk_estimate;

/* Datasets: y = X beta + eps, X is n x d and stored row-major. */
typedef struct rl_dataset rl_dataset;

RL_API rl_status rl_dataset_sample(int64_t d, int64_t n, double c, int haar_direction,
                                   uint64_t seed, uint64_t stream, rl_dataset** out);
RL_API rl_status rl_dataset_from_arrays(int64_t n, int64_t d, const double* X, const double* y,
                                        const double* beta, rl_dataset** out);
RL_API rl_status rl_dataset_shape(const rl_dataset* data, int64_t* n, int64_t* d);
RL_API rl_status rl_dataset_copy_X(const rl_dataset* data, double* buffer, size_t length);
RL_API rl_status rl_dataset_copy_y(const rl_dataset* data, double* buffer, size_t length);
RL_API rl_status rl_dataset_copy_beta(const rl_dataset* data, double* buffer, size_t length);
RL_API void rl_dataset_destroy(rl_dataset* data);

/* Estimators by tag: "ridge:<c>", "oracle_ridge", "adaptive_ridge", "ols",
   "scaled_ols_oracle", "null", "sphere_bayes[:<c>]". */
typedef struct rl_estimator rl_estimator;

RL_API rl_status rl_estimator_parse(const char* tag, rl_estimator** out);
/* Writes the canonical tag, truncated to length - 1 characters. */
RL_API rl_status rl_estimator_tag(const rl_estimator* est, char* buffer, size_t length);
/* true_c feeds the oracle estimators; out receives d values. */
RL_API rl_status rl_estimator_apply(const rl_estimator* est, const rl_dataset* data,
                                    double true_c, const rl_options* options, uint64_t seed,
                                    double* out, size_t length);
RL_API void rl_estimator_destroy(rl_estimator* est);

/* Risk. options may be NULL for defaults. */
RL_API rl_status rl_mc_risk(const rl_estimator* est, int64_t d, int64_t n, double c,
                            int haar_direction, uint64_t reps, uint64_t seed,
                            const rl_options* options, rl_risk_estimate* out);
RL_API rl_status rl_mc_risk_paired(const rl_estimator* first, const rl_estimator* second,
                                   int64_t d, int64_t n, double c, uint64_t reps, uint64_t seed,
                                   const rl_options* options, rl_risk_estimate* first_out,
                                   rl_risk_estimate* second_out, rl_risk_estimate* difference);
RL_API rl_status rl_trace_risk_oracle_ridge(int64_t d, int64_t n, double c, uint64_t reps,
                                            uint64_t seed, const rl_options* options,
                                            rl_risk_estimate* out);
RL_API rl_status rl_jensen_bounds(int64_t d, int64_t n, double c, double* lower, double* upper);
RL_API rl_status rl_ols_risk_exact(int64_t d, int64_t n, double* out);
RL_API rl_status rl_scaled_ols_risk_exact(int64_t d, int64_t n, double c, double* out);
/* mean is +inf when the bound is infinite. */
RL_API rl_status rl_ridge_gap_bound(int64_t d, int64_t n, double c, uint64_t reps,
                                    uint64_t seed, const rl_options* options,
                                    rl_risk_estimate* out);
RL_API rl_status rl_equivariant_floor(int64_t d, int64_t n, double c, double* out);
RL_API rl_status rl_equivariant_risk(int64_t d, int64_t n, double c, uint64_t reps,
                                     uint64_t seed, const rl_options* options,
                                     rl_risk_estimate* out);

/* Limits and the Marchenko-Pastur law of X^T X / n at rho = d / n. */
RL_API rl_status rl_linear_minimax_risk(double rho, double c, double* out);
RL_API rl_status rl_limiting_ridge_risk(double rho, double c, double* out);
RL_API rl_status rl_limiting_ridge_residual(double rho, double c, double* out);
RL_API rl_status rl_mp_density(double rho, double lambda, double* out);
RL_API rl_status rl_mp_atom(double rho, double* out);
RL_API rl_status rl_mp_stieltjes(double rho, double z, double* out);

/* Sequence model z = theta + Sigma^{1/2} delta. Sigma is m x m row-major. */
RL_API rl_status rl_seq_ridge(int64_t m, const double* Sigma, const double* z, double c,
                              double* out);
RL_API rl_status rl_seq_posterior_mean_sphere(int64_t m, const double* Sigma, const double* z,
                                              double c, const rl_options* options, uint64_t seed,
                                              double* out);
RL_API rl_status rl_marchand_gap_check(int64_t m, double tau2, double c, double* gap,
                                       double* bound);
RL_API rl_status rl_brown_identity_check(int64_t m, double tau2, double c, double* lhs,
                                         double* rhs);
RL_API rl_status rl_stam_min_slack(double tau2_v, double c, double tau2_w, double* slack);

/* Experiments from a JSON config. */
typedef struct rl_experiment rl_experiment;
typedef void (*rl_progress_fn)(const char* message, void* user);

RL_API rl_status rl_experiment_create(const char* json_config, rl_experiment** out);
RL_API rl_status rl_experiment_set_progress(rl_experiment* exp, rl_progress_fn fn, void* user);
/* exit_code: 0 all good, 1 a verification check failed. */
RL_API rl_status rl_experiment_run(rl_experiment* exp, int* exit_code);
/* Valid until the next run or destroy. */
RL_API rl_status rl_experiment_output(const rl_experiment* exp, const char** data,
                                      size_t* length);
RL_API rl_status rl_experiment_config_json(const rl_experiment* exp, const char** data,
                                           size_t* length);
RL_API void rl_experiment_destroy(rl_experiment* exp);

#ifdef __cplusplus
}
#endif

#endif
