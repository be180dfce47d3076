/*
 * C interface to the sarange library: output range estimation of black-box
 * functions and residual networks by simulated annealing with reflective
 * boundary conditions.
 *
 * Objects are opaque handles created by sar_*_create / sar_*_load style calls
 * and released with the matching sar_*_destroy. Every fallible call returns a
 * sar_status; on failure sar_last_error() describes the problem (the message
 * is thread-local and valid until the next failing call on that thread).
 *
 * Functions returning text take (buf, cap, len): up to cap bytes including
 * the terminating NUL are written to buf and *len receives the full length
 * without the NUL. Pass buf = NULL, cap = 0 to query the length.
 */
#ifndef SARANGE_SARANGE_H
#define SARANGE_SARANGE_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#  if defined(SARANGE_BUILDING_LIBRARY)
#    define SAR_API __declspec(dllexport)
#  else
#    define SAR_API __declspec(dllimport)
#  endif
#else
#  define SAR_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum sar_status {
  SAR_OK = 0,
  SAR_ERR_INVALID_ARGUMENT = 1,
  SAR_ERR_DIMENSION = 2,
  SAR_ERR_NUMERICAL = 3,
  SAR_ERR_PARSE = 4,
  SAR_ERR_IO = 5,
  SAR_ERR_BUDGET = 6,
  SAR_ERR_INTERNAL = 7
} sar_status;

typedef struct sar_domain sar_domain;
typedef struct sar_objective sar_objective;
typedef struct sar_dataset sar_dataset;
typedef struct sar_resnet sar_resnet;
typedef struct sar_anneal_result sar_anneal_result;
typedef struct sar_range_result sar_range_result;
typedef struct sar_oracle_result sar_oracle_result;

SAR_API const char* sar_version(void);
SAR_API const char* sar_last_error(void);
SAR_API const char* sar_status_name(sar_status status);

/* ---- domain ------------------------------------------------------------ */

/* bounds holds l1,u1,...,ld,ud (2 * dim values). */
SAR_API sar_status sar_domain_create(const double* bounds, size_t dim,
                                     sar_domain** out);
SAR_API void sar_domain_destroy(sar_domain* domain);
SAR_API size_t sar_domain_dim(const sar_domain* domain);
SAR_API sar_status sar_domain_bounds(const sar_domain* domain, double* bounds);
SAR_API sar_status sar_domain_contains(const sar_domain* domain, const double* p,
                                       size_t dim, int* inside);
SAR_API sar_status sar_domain_reflect(const sar_domain* domain, const double* y,
                                      size_t dim, double* out);

/* ---- objectives -------------------------------------------------------- */

/* Builtins: "ackley", "dropwave", "multimin". */
SAR_API sar_status sar_objective_builtin(const char* name, sar_objective** out);
/* The objective keeps its own copy of the network. */
SAR_API sar_status sar_objective_from_resnet(const sar_resnet* net,
                                             sar_objective** out);
SAR_API void sar_objective_destroy(sar_objective* objective);
SAR_API size_t sar_objective_dim(const sar_objective* objective);
SAR_API sar_status sar_objective_eval(const sar_objective* objective,
                                      const double* x, size_t dim, double* out);
/* Space-separated builtin names. */
SAR_API const char* sar_builtin_names(void);
/* The domain each builtin is studied on. */
SAR_API sar_status sar_builtin_domain(const char* name, sar_domain** out);

/* ---- datasets ---------------------------------------------------------- */

SAR_API sar_status sar_dataset_sample(const sar_objective* objective,
                                      const sar_domain* domain, size_t m,
                                      double noise_sd, uint64_t seed,
                                      sar_dataset** out);
/* meta_path may be NULL; otherwise the sidecar JSON is read as well. */
SAR_API sar_status sar_dataset_load(const char* csv_path, const char* meta_path,
                                    sar_dataset** out);
SAR_API sar_status sar_dataset_write_csv(const sar_dataset* data,
                                         const char* path);
SAR_API sar_status sar_dataset_metadata_json(const sar_dataset* data, char* buf,
                                             size_t cap, size_t* len);
SAR_API void sar_dataset_destroy(sar_dataset* data);
SAR_API size_t sar_dataset_rows(const sar_dataset* data);
SAR_API size_t sar_dataset_dim(const sar_dataset* data);

/* ---- residual networks ------------------------------------------------- */

/* preset: "ackley", "dropwave", "multimin"; width_divisor >= 1 shrinks the
 * hidden widths. */
SAR_API sar_status sar_resnet_architecture(const char* preset,
                                           size_t width_divisor,
                                           uint64_t init_seed, sar_resnet** out);
SAR_API sar_status sar_resnet_load(const char* path, sar_resnet** out);
SAR_API sar_status sar_resnet_save(const sar_resnet* net, const char* path);
SAR_API void sar_resnet_destroy(sar_resnet* net);
SAR_API size_t sar_resnet_input_dim(const sar_resnet* net);
SAR_API size_t sar_resnet_parameter_count(const sar_resnet* net);
SAR_API sar_status sar_resnet_forward(const sar_resnet* net, const double* x,
                                      size_t dim, double* out);

/* ---- training ---------------------------------------------------------- */

typedef struct sar_train_config {
  double learning_rate;
  uint32_t epochs;
  uint32_t batch_size; /* 0: full batch up to 4096 rows, else 256 */
  double adam_beta1;
  double adam_beta2;
  double adam_epsilon;
  uint64_t seed;
} sar_train_config;

typedef void (*sar_progress_fn)(uint32_t epoch, double loss, void* user);

SAR_API void sar_train_config_default(sar_train_config* cfg);
/* loss_history, when not NULL, receives cfg->epochs values. final_mse may be
 * NULL. */
SAR_API sar_status sar_train(sar_resnet* net, const sar_dataset* data,
                             const sar_train_config* cfg, double* loss_history,
                             double* final_mse, sar_progress_fn progress,
                             void* user);

typedef struct sar_fit_report {
  double mae;
  double mse;
  size_t n_eval_points;
  uint64_t eval_seed;
} sar_fit_report;

SAR_API sar_status sar_evaluate_fit(const sar_resnet* net,
                                    const sar_objective* objective,
                                    const sar_domain* eval_domain, size_t n,
                                    uint64_t seed, sar_fit_report* out);
SAR_API sar_status sar_fit_report_json(const sar_fit_report* report,
                                       const sar_domain* eval_domain, char* buf,
                                       size_t cap, size_t* len);

/* ---- annealing --------------------------------------------------------- */

typedef enum sar_mode { SAR_MODE_REFLECTED = 0, SAR_MODE_CLASSICAL = 1 } sar_mode;
typedef enum sar_cooling {
  SAR_COOLING_THEOREM = 0,   /* T_i = T_0 delta^i */
  SAR_COOLING_ALGORITHM1 = 1 /* T_i = T_{i-1} delta^i */
} sar_cooling;

typedef struct sar_anneal_config {
  double t_max;
  double t_min;
  double delta;
  uint32_t inner_iters;
  double proposal_variance; /* <= 0: (0.1 * smallest box width)^2 */
  uint64_t seed;
  sar_mode mode;
  sar_cooling cooling;
} sar_anneal_config;

SAR_API void sar_anneal_config_default(sar_anneal_config* cfg);
SAR_API double sar_acceptance_probability(double delta_f, double temperature);

SAR_API sar_status sar_anneal_run(const sar_objective* objective,
                                  const sar_domain* domain,
                                  const sar_anneal_config* cfg,
                                  sar_anneal_result** out);
SAR_API void sar_anneal_result_destroy(sar_anneal_result* result);
SAR_API double sar_anneal_result_best_value(const sar_anneal_result* result);
/* point receives dim values. */
SAR_API sar_status sar_anneal_result_best_point(const sar_anneal_result* result,
                                                double* point, size_t dim);
SAR_API size_t sar_anneal_result_evaluations(const sar_anneal_result* result);
SAR_API size_t sar_anneal_result_trace_length(const sar_anneal_result* result);
SAR_API sar_status sar_anneal_result_write_trace(const sar_anneal_result* result,
                                                 const char* path);
SAR_API sar_status sar_anneal_result_json(const sar_anneal_result* result,
                                          char* buf, size_t cap, size_t* len);

typedef struct sar_chain_summary {
  double best_value;
  size_t iterations_to_best;
  double max_excursion;
  size_t outside_count;
  /* First iteration whose incumbent is within tol of target, or -1. */
  int64_t iterations_to_target;
} sar_chain_summary;

SAR_API sar_status sar_anneal_result_summary(const sar_anneal_result* result,
                                             const sar_domain* domain,
                                             double target, double tol,
                                             sar_chain_summary* out);

/* ---- range estimation -------------------------------------------------- */

/* threads = 0 uses one worker per hardware thread. */
SAR_API sar_status sar_estimate_range(const sar_objective* objective,
                                      const sar_domain* domain,
                                      const sar_anneal_config* cfg,
                                      size_t n_seeds, size_t threads,
                                      sar_range_result** out);
SAR_API void sar_range_result_destroy(sar_range_result* result);
SAR_API double sar_range_result_min(const sar_range_result* result);
SAR_API double sar_range_result_max(const sar_range_result* result);
SAR_API sar_status sar_range_result_argmin(const sar_range_result* result,
                                           double* point, size_t dim);
SAR_API sar_status sar_range_result_argmax(const sar_range_result* result,
                                           double* point, size_t dim);
SAR_API size_t sar_range_result_eval_count(const sar_range_result* result);
SAR_API size_t sar_range_result_seed_count(const sar_range_result* result);
/* which: 0 = minimization chains, 1 = maximization chains (values written in
 * units of f, best_value as the running maximum). */
SAR_API sar_status sar_range_result_write_trace(const sar_range_result* result,
                                                int which, size_t index,
                                                const char* path);
SAR_API sar_status sar_range_result_json(const sar_range_result* result,
                                         char* buf, size_t cap, size_t* len);

/* ---- grid oracle ------------------------------------------------------- */

SAR_API sar_status sar_grid_oracle(const sar_objective* objective,
                                   const sar_domain* domain,
                                   size_t points_per_dim,
                                   sar_oracle_result** out);
SAR_API void sar_oracle_result_destroy(sar_oracle_result* result);
SAR_API double sar_oracle_result_min(const sar_oracle_result* result);
SAR_API double sar_oracle_result_max(const sar_oracle_result* result);
SAR_API sar_status sar_oracle_result_argmin(const sar_oracle_result* result,
                                            double* point, size_t dim);
SAR_API sar_status sar_oracle_result_argmax(const sar_oracle_result* result,
                                            double* point, size_t dim);
SAR_API sar_status sar_oracle_result_json(const sar_oracle_result* result,
                                          char* buf, size_t cap, size_t* len);

#ifdef __cplusplus
}
#endif

#endif /* SARANGE_SARANGE_H */
