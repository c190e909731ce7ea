#ifndef LOGBANDIT_H
#define LOGBANDIT_H

/* Generated by cbindgen from logbandit-ffi; edit src/lib.rs, not this file. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status code returned by every fallible call.
 */
enum lb_status
#ifdef __cplusplus
  : int32_t
#endif // __cplusplus
 {
  /**
   * Success.
   */
  LB_OK = 0,
  /**
   * A required pointer argument was `NULL`.
   */
  LB_NULL_POINTER = 1,
  /**
   * An argument failed validation (non-finite, out of range, unknown
   * name, norm above the unit ball, ...).
   */
  LB_INVALID_ARGUMENT = 2,
  /**
   * Vector or handle dimensions disagree.
   */
  LB_DIMENSION_MISMATCH = 3,
  /**
   * The computation itself failed; see `lb_last_error_message`.
   */
  LB_RUNTIME_ERROR = 4,
  /**
   * A panic was caught at the boundary. State behind the involved
   * handles may be inconsistent; freeing them is the only safe next use.
   */
  LB_PANIC = 5,
};
#ifndef __cplusplus
typedef int32_t lb_status;
#endif // __cplusplus

/**
 * A confidence-set snapshot frozen at one round. Bundles the history it
 * was built from because membership tests and planning rescan the data.
 */
typedef struct lb_confidence lb_confidence;

/**
 * An append-only record of played arms and binary rewards.
 */
typedef struct lb_history lb_history;

/**
 * A fixed environment: the true parameter, its norm bound, and the arm set.
 */
typedef struct lb_instance lb_instance;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static string; never `NULL`, never freed.
 */
const char *lb_version(void);

/**
 * Explanation of the most recent failure on the calling thread.
 *
 * Empty string when nothing failed yet. The pointer stays valid until the
 * next failing `lb_` call on the same thread; copy it out if you keep it.
 */
const char *lb_last_error_message(void);

/**
 * The logistic link `1 / (1 + exp(-z))`, overflow-free for any finite `z`.
 */
double lb_logistic(double z);

/**
 * Creates an environment whose arm set is the full unit ball.
 *
 * `theta_star` is `dim` doubles with Euclidean norm at most `s_bound`;
 * `resolution` is the boundary discretization used by grid-based planners
 * and oracles (points per full circle; pass 0 to leave it unset).
 */
lb_status lb_instance_new_ball(const double *theta_star,
                               size_t dim,
                               double s_bound,
                               uint32_t resolution,
                               lb_instance **out);

/**
 * Creates an environment whose arm set is the unit sphere (boundary only).
 * Arguments as in `lb_instance_new_ball`.
 */
lb_status lb_instance_new_sphere(const double *theta_star,
                                 size_t dim,
                                 double s_bound,
                                 uint32_t resolution,
                                 lb_instance **out);

/**
 * Creates an environment over an explicit dictionary of `n_arms` arms,
 * given row-major as `n_arms * dim` doubles. Every arm must lie in the
 * unit ball.
 */
lb_status lb_instance_new_finite(const double *theta_star,
                                 size_t dim,
                                 double s_bound,
                                 const double *arms,
                                 size_t n_arms,
                                 lb_instance **out);

/**
 * Destroys an instance handle. `NULL` is a no-op.
 */
void lb_instance_free(lb_instance *inst);

/**
 * Ambient dimension of the environment; 0 if `inst` is `NULL`.
 */
size_t lb_instance_dim(const lb_instance *inst);

/**
 * Flatness constants of the environment, largest first in difficulty:
 * `kappa_global` (worst over the whole parameter ball), `kappa_x` (worst
 * over the arm set at the true parameter), `kappa_star` (at the best arm
 * only). Any output pointer may be `NULL` to skip that value.
 */
lb_status lb_instance_kappas(const lb_instance *inst,
                             double *kappa_star,
                             double *kappa_x,
                             double *kappa_global);

/**
 * Reward-maximizing arm under the true parameter. `coords` receives `dim`
 * doubles; `value` receives the attained logit `arm . theta_star`. Either
 * output may be `NULL`.
 */
lb_status lb_instance_best_arm(const lb_instance *inst, double *coords, double *value);

/**
 * Creates an empty history for arms of the given dimension.
 */
lb_status lb_history_new(size_t dim, lb_history **out);

/**
 * Destroys a history handle. `NULL` is a no-op.
 */
void lb_history_free(lb_history *h);

/**
 * Number of recorded rounds; 0 if `h` is `NULL`.
 */
size_t lb_history_len(const lb_history *h);

/**
 * Appends one round: the played arm (`dim` doubles, unit ball) and its
 * binary reward. `reward` must be exactly 0 or 1 — anything else is
 * rejected rather than coerced, to catch sign or scaling bugs early.
 */
lb_status lb_history_push(lb_history *h, const double *arm, size_t dim, int reward);

/**
 * Fits the ridge-regularized logistic MLE on `h` at the given `lambda`.
 * `theta` receives `dim` doubles; `loss` (optional) the attained
 * regularized loss.
 */
lb_status lb_fit_mle(const lb_history *h, double lambda, double *theta, double *loss);

/**
 * Builds the confidence-set pair (exact and relaxed) from a history at its
 * current round, using the scheduled regularization for that round.
 *
 * `delta` is the confidence level in (0, 1); `s_bound` the parameter-norm
 * bound the radii assume. The handle snapshots the history: later pushes
 * to `h` do not affect it.
 */
lb_status lb_confidence_build(const lb_history *h,
                              double delta,
                              double s_bound,
                              lb_confidence **out);

/**
 * Destroys a confidence handle. `NULL` is a no-op.
 */
void lb_confidence_free(lb_confidence *c);

/**
 * Round the snapshot acts in: one more than the number of observed
 * rounds, matching the convention that the set built from `t` rounds of
 * data steers the choice at round `t + 1`. 0 if `c` is `NULL`.
 */
uint64_t lb_confidence_round(const lb_confidence *c);

/**
 * Parameter dimension; 0 if `c` is `NULL`.
 */
size_t lb_confidence_dim(const lb_confidence *c);

/**
 * Exact-set radius (gradient metric); NaN if `c` is `NULL`.
 */
double lb_confidence_gamma(const lb_confidence *c);

/**
 * Relaxed-set radius (`beta`, with loss-gap threshold `beta^2`); NaN if
 * `c` is `NULL`.
 */
double lb_confidence_beta(const lb_confidence *c);

/**
 * Regularization weight in force at the snapshot round; NaN if `c` is
 * `NULL`.
 */
double lb_confidence_lambda(const lb_confidence *c);

/**
 * Copies the fitted center (the regularized MLE) into `theta` (`dim`
 * doubles).
 */
lb_status lb_confidence_theta_hat(const lb_confidence *c, double *theta);

/**
 * Tests membership in the exact confidence set (parameter ball plus
 * gradient-metric distance at most gamma). `inside` receives 1 or 0.
 */
lb_status lb_confidence_contains(const lb_confidence *c,
                                 const double *theta,
                                 size_t dim,
                                 int *inside);

/**
 * Tests membership in the relaxed confidence set (parameter ball plus
 * loss gap at most beta^2). The relaxed set contains the exact one.
 */
lb_status lb_confidence_contains_relaxed(const lb_confidence *c,
                                         const double *theta,
                                         size_t dim,
                                         int *inside);

/**
 * Optimistic plan over the unit ball: maximizes `arm . theta` jointly over
 * unit-norm arms and parameters in the relaxed set.
 *
 * `arm` receives `dim` doubles (required); `value` the attained logit and
 * `theta` the maximizing parameter (`dim` doubles), both optional.
 */
lb_status lb_plan_ball(const lb_confidence *c, double *arm, double *value, double *theta);

/**
 * Optimistic plan over an explicit dictionary (`n_arms * dim` doubles,
 * row-major, `dim` from the confidence handle): maximizes `arm . theta`
 * over arms and parameters in the relaxed set.
 *
 * `index` receives the winning row (required); `value` the attained
 * logit, optional.
 */
lb_status lb_plan_finite(const lb_confidence *c,
                         const double *arms,
                         size_t n_arms,
                         size_t *index,
                         double *value);

/**
 * Simulates one bandit episode and reports cumulative expected regret.
 *
 * `policy` selects the algorithm by name: `"ofulog-r"` (optimistic
 * planning over the relaxed set), `"glm-ucb"` (classic UCB paying the
 * global flatness constant), `"eps-greedy"` (0.1-greedy), or
 * `"best-fixed"` (oracle arm every round). `final_regret` (optional)
 * receives the regret after `horizon` rounds; `regret_series` (optional)
 * must hold `horizon` doubles and receives the cumulative regret at every
 * round. Rewards are drawn from a deterministic generator seeded with
 * `seed`; identical inputs reproduce identical output bit-for-bit.
 */
lb_status lb_episode_run(const lb_instance *inst,
                         const char *policy,
                         uint64_t horizon,
                         uint64_t seed,
                         double delta,
                         double *final_regret,
                         double *regret_series);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* LOGBANDIT_H */
