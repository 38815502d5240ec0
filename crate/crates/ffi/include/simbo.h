#ifndef SIMBO_H
#define SIMBO_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum SimboStatus {
  SIMBO_STATUS_OK = 0,
  SIMBO_STATUS_NULL_POINTER = 1,
  SIMBO_STATUS_INVALID_ARGUMENT = 2,
  SIMBO_STATUS_DIVERGENCE = 3,
  SIMBO_STATUS_NUMERICAL = 4,
  SIMBO_STATUS_IO = 5,
  SIMBO_STATUS_PANIC = 6,
} SimboStatus;

typedef enum SimboFidelity {
  SIMBO_FIDELITY_L0 = 0,
  SIMBO_FIDELITY_L1 = 1,
  SIMBO_FIDELITY_L2 = 2,
} SimboFidelity;

/**
 * GP surrogate over unit-cube points with an SE kernel.
 */
typedef struct SimboGp SimboGp;

/**
 * Robot description and simulator settings.
 */
typedef struct SimboModel SimboModel;

/**
 * Outcome of one controller rollout.
 */
typedef struct SimboRollout {
  double cost;
  bool walked;
  double t_sim;
  size_t steps;
  /**
   * Forward CoM displacement, m.
   */
  double distance;
} SimboRollout;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Copy the last error message of this thread into `buf` (NUL-terminated,
 * truncated to `len`). Returns the full message length, 0 when none.
 *
 * # Safety
 * `buf` must be null or point to `len` writable bytes.
 */
size_t simbo_last_error(char *buf, size_t len);

/**
 * Default 60 kg biped with default simulator settings. Never null.
 */
struct SimboModel *simbo_model_new(void);

/**
 * # Safety
 * `model` must be null or a handle from [`simbo_model_new`] not yet freed.
 */
void simbo_model_free(struct SimboModel *model);

/**
 * Number of unit-cube coordinates for a 5- or 9-parameter controller.
 */
size_t simbo_param_dim(uint32_t dims);

/**
 * Roll out the reactive controller at unit-cube point `u` (length 5 or 9)
 * for `horizon` seconds at a constant 0.4 m/s target and score it with the
 * hardware cost.
 *
 * # Safety
 * `model` must be a live handle, `u` must point to `n` readable doubles and
 * `out` to one writable [`SimboRollout`].
 */
enum SimboStatus simbo_rollout(const struct SimboModel *model,
                               enum SimboFidelity fidelity,
                               const double *u,
                               size_t n,
                               double horizon,
                               struct SimboRollout *out);

/**
 * Empty SE-kernel GP over `dim`-dimensional points with default
 * hyperparameters. Null when `dim` is 0.
 */
struct SimboGp *simbo_gp_new(size_t dim);

/**
 * # Safety
 * `gp` must be null or a handle from [`simbo_gp_new`] not yet freed.
 */
void simbo_gp_free(struct SimboGp *gp);

/**
 * # Safety
 * `gp` must be a live handle and `x` must point to `dim` readable doubles.
 */
enum SimboStatus simbo_gp_add(struct SimboGp *gp, const double *x, size_t dim, double y);

/**
 * Number of training points held by `gp`, 0 for null.
 *
 * # Safety
 * `gp` must be null or a live handle.
 */
size_t simbo_gp_len(const struct SimboGp *gp);

/**
 * Posterior mean and variance at `x`.
 *
 * # Safety
 * `gp` must be a live handle, `x` must point to `dim` readable doubles and
 * `mean`, `var` to one writable double each.
 */
enum SimboStatus simbo_gp_posterior(const struct SimboGp *gp,
                                    const double *x,
                                    size_t dim,
                                    double *mean,
                                    double *var);

/**
 * Expected improvement below `best` of a normal with the given moments.
 */
double simbo_expected_improvement(double mean, double variance, double best);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SIMBO_H */
