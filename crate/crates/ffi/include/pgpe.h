#ifndef PGPE_H
#define PGPE_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stddef.h>
#include <stdint.h>

// Result code of every exported function.
typedef enum PgpeStatus {
  PGPE_STATUS_OK = 0,
  // A required pointer argument was null.
  PGPE_STATUS_NULL_POINTER = 1,
  // A numeric argument was outside its domain.
  PGPE_STATUS_INVALID_ARGUMENT = 2,
  // Vector lengths disagree.
  PGPE_STATUS_DIMENSION_MISMATCH = 3,
  // A configuration document could not be parsed or validated.
  PGPE_STATUS_CONFIG = 4,
  // The requested operation is not supported for these arguments.
  PGPE_STATUS_UNSUPPORTED = 5,
  // A Rust panic was caught at the boundary.
  PGPE_STATUS_PANIC = 6,
} PgpeStatus;

// Codes accepted by the `objective` arguments.
typedef enum PgpeObjective {
  PGPE_OBJECTIVE_SPHERE = 0,
  PGPE_OBJECTIVE_RASTRIGIN = 1,
} PgpeObjective;

// Codes accepted by the `variant` argument of [`pgpe_optimizer_new`].
typedef enum PgpeVariant {
  PGPE_VARIANT_PGPE = 0,
  PGPE_VARIANT_SYS = 1,
  PGPE_VARIANT_SUP_SYS = 2,
  PGPE_VARIANT_PGPE4SMP = 3,
  PGPE_VARIANT_SUP_IF = 4,
} PgpeVariant;

// Opaque optimizer handle.
typedef struct PgpeOptimizer PgpeOptimizer;

// Reward callback: receives `dim` parameters and the caller's `user_data`.
typedef double (*PgpeRewardFn)(const double *theta, size_t dim, void *user_data);

// Message of the last failed call on this thread, or null if none.
//
// The pointer stays valid until the next failing call on the same thread.
const char *pgpe_last_error_message(void);

// Median deviation `0.67449 * sigma`.
//
// # Safety
// `out` must be null or valid for one `double` write.
enum PgpeStatus pgpe_median_from_std(double sigma, double *out);

// Mirror of `eps` across the median deviation `phi`.
//
// # Safety
// `out` must be null or valid for one `double` write.
enum PgpeStatus pgpe_mirror(double eps, double phi, double *out);

// Objective value (to be minimized) at `theta[0..dim]`.
//
// # Safety
// `theta` must point to `dim` doubles; `out` must be valid for one write.
enum PgpeStatus pgpe_objective_value(int32_t objective,
                                     const double *theta,
                                     size_t dim,
                                     double *out);

// Creates an optimizer at `mu0[0..dim]` with isotropic `sigma0`, the
// default decaying baseline and a random stream seeded by `seed`.
//
// # Safety
// `mu0` must point to `dim` doubles; `out` must be valid for one pointer write.
enum PgpeStatus pgpe_optimizer_new(int32_t variant,
                                   const double *mu0,
                                   size_t dim,
                                   double sigma0,
                                   double alpha_mu,
                                   double alpha_sigma,
                                   uint64_t seed,
                                   struct PgpeOptimizer **out);

// Releases an optimizer. Null is ignored.
//
// # Safety
// `handle` must be null or come from [`pgpe_optimizer_new`] and not be used afterwards.
void pgpe_optimizer_free(struct PgpeOptimizer *handle);

// One update against a built-in objective. `best_reward` (optional)
// receives the best reward sampled during the step.
//
// # Safety
// `handle` must be a live optimizer; `best_reward` null or writable.
enum PgpeStatus pgpe_optimizer_step(struct PgpeOptimizer *handle,
                                    int32_t objective,
                                    double *best_reward);

// One update against a caller-supplied reward (higher is better).
//
// # Safety
// `handle` must be a live optimizer, `reward` a function that reads at
// most `dim` doubles, and `best_reward` null or writable.
enum PgpeStatus pgpe_optimizer_step_with(struct PgpeOptimizer *handle,
                                         PgpeRewardFn reward,
                                         void *user_data,
                                         double *best_reward);

// Search-space dimension of the optimizer.
//
// # Safety
// `handle` must be a live optimizer; `out` writable.
enum PgpeStatus pgpe_optimizer_dim(const struct PgpeOptimizer *handle, size_t *out);

// Objective evaluations consumed so far.
//
// # Safety
// `handle` must be a live optimizer; `out` writable.
enum PgpeStatus pgpe_optimizer_evaluations(const struct PgpeOptimizer *handle, uint64_t *out);

// Copies the current mean into `out[0..len]`; `len` must equal the dimension.
//
// # Safety
// `handle` must be a live optimizer; `out` valid for `len` writes.
enum PgpeStatus pgpe_optimizer_mu(const struct PgpeOptimizer *handle, double *out, size_t len);

// Copies the current standard deviations into `out[0..len]`.
//
// # Safety
// `handle` must be a live optimizer; `out` valid for `len` writes.
enum PgpeStatus pgpe_optimizer_sigma(const struct PgpeOptimizer *handle, double *out, size_t len);

// Runs the batch described by a JSON experiment document (the format read
// by `pgpe run --config`) and returns the
// aggregate curve as CSV in `*out_csv` (free with [`pgpe_string_free`]).
//
// # Safety
// `config_json` must be a NUL-terminated string; `out_csv` writable.
enum PgpeStatus pgpe_run_batch_json(const char *config_json, char **out_csv);

// Releases a string returned by this library. Null is ignored.
//
// # Safety
// `s` must be null or a string from this library not freed before.
void pgpe_string_free(char *s);

#endif  /* PGPE_H */
