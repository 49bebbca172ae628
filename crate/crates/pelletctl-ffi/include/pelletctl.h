/* C interface to the pelletctl density-controller library. */

#ifndef PELLETCTL_H
#define PELLETCTL_H

/* Generated by cbindgen from the pelletctl-ffi crate; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status code returned by every fallible function.
 */
typedef enum PelletctlStatus {
  PELLETCTL_STATUS_OK = 0,
  /**
   * A parameter violates its validity constraint.
   */
  PELLETCTL_STATUS_INVALID_PARAM = 1,
  /**
   * A NULL handle or otherwise unusable argument was passed.
   */
  PELLETCTL_STATUS_INVALID_ARGUMENT = 2,
  /**
   * The slot period exceeds the admissible maximum.
   */
  PELLETCTL_STATUS_ACTUATOR_TOO_SLOW = 3,
  /**
   * The simulation rejected its inputs.
   */
  PELLETCTL_STATUS_SIMULATION_FAILED = 4,
  /**
   * The horizon is too short for the requested verification.
   */
  PELLETCTL_STATUS_HORIZON_TOO_SHORT = 5,
  /**
   * An index is out of range.
   */
  PELLETCTL_STATUS_OUT_OF_RANGE = 6,
} PelletctlStatus;

/**
 * Jump classification in trajectory accessors.
 */
typedef enum PelletctlJumpKind {
  PELLETCTL_JUMP_KIND_SKIP = 0,
  PELLETCTL_JUMP_KIND_PELLET = 1,
} PelletctlJumpKind;

/**
 * Opaque validated parameter set.
 */
typedef struct PelletctlParams PelletctlParams;

/**
 * Opaque closed-loop trajectory.
 */
typedef struct PelletctlTrajectory PelletctlTrajectory;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Validate a parameter set and return a handle through `out`.
 *
 * # Safety
 * `out` must be a valid pointer. On `Ok` the caller owns the handle and must
 * release it with [`pelletctl_params_free`].
 */
enum PelletctlStatus pelletctl_params_new(double tau,
                                          double r,
                                          double alpha,
                                          double t_c,
                                          double delta,
                                          struct PelletctlParams **out);

/**
 * Release a parameter handle. NULL is a no-op.
 *
 * # Safety
 * `params` must be a handle obtained from [`pelletctl_params_new`] that has
 * not been freed already.
 */
void pelletctl_params_free(struct PelletctlParams *params);

/**
 * Query the design bounds: contraction ratio, dwell bound, maximum slot
 * period and maximum threshold. Any out-pointer may be NULL.
 *
 * # Safety
 * `params` must be a live handle.
 */
enum PelletctlStatus pelletctl_bounds(const struct PelletctlParams *params,
                                      double *out_gamma,
                                      double *out_tau_d,
                                      double *out_t_c_max,
                                      double *out_delta_max);

/**
 * Run the closed loop from error `x0` over `horizon` seconds and return the
 * trajectory through `out`.
 *
 * # Safety
 * `params` must be a live handle and `out` a valid pointer. On `Ok` the
 * caller owns the trajectory and must release it with
 * [`pelletctl_trajectory_free`].
 */
enum PelletctlStatus pelletctl_simulate(const struct PelletctlParams *params,
                                        double x0,
                                        double horizon,
                                        struct PelletctlTrajectory **out);

/**
 * Release a trajectory handle. NULL is a no-op.
 *
 * # Safety
 * `traj` must be a handle obtained from [`pelletctl_simulate`] that has not
 * been freed already.
 */
void pelletctl_trajectory_free(struct PelletctlTrajectory *traj);

/**
 * Number of jumps (slot decisions) in the trajectory.
 *
 * # Safety
 * `traj` must be a live handle.
 */
size_t pelletctl_trajectory_jump_count(const struct PelletctlTrajectory *traj);

/**
 * Fetch one jump record by index. Any out-pointer may be NULL.
 *
 * # Safety
 * `traj` must be a live handle.
 */
enum PelletctlStatus pelletctl_trajectory_jump(const struct PelletctlTrajectory *traj,
                                               size_t index,
                                               double *out_time,
                                               enum PelletctlJumpKind *out_kind,
                                               double *out_x_before,
                                               double *out_x_after);

/**
 * Evaluate the trajectory state at continuous time `t`. `out_xi` may be
 * NULL. At a jump instant the post-jump state is returned.
 *
 * # Safety
 * `traj` must be a live handle.
 */
enum PelletctlStatus pelletctl_trajectory_state_at(const struct PelletctlTrajectory *traj,
                                                   double t,
                                                   double *out_x,
                                                   double *out_xi);

/**
 * Evaluate the analytic bound envelope at time `t`. Either out-pointer may
 * be NULL.
 *
 * # Safety
 * `params` must be a live handle.
 */
enum PelletctlStatus pelletctl_envelope_at(const struct PelletctlParams *params,
                                           double x0,
                                           double t,
                                           double *out_lower,
                                           double *out_upper);

/**
 * Run the full verification battery on a trajectory. `out_passed` receives
 * 1 when every check holds, 0 otherwise.
 *
 * # Safety
 * `traj` must be a live handle and `out_passed` a valid pointer.
 */
enum PelletctlStatus pelletctl_verify(const struct PelletctlTrajectory *traj,
                                      double settle_tol,
                                      int32_t *out_passed);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* PELLETCTL_H */
