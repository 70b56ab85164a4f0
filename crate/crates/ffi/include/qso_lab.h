#ifndef QSO_LAB_H
#define QSO_LAB_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum QsoStatus {
  QSO_STATUS_OK = 0,
  QSO_STATUS_NULL_POINTER = 1,
  QSO_STATUS_PARSE = 2,
  QSO_STATUS_INVALID = 3,
  QSO_STATUS_DIMENSION = 4,
  QSO_STATUS_BOUND = 5,
  QSO_STATUS_PANIC = 6,
} QsoStatus;

typedef enum QsoVerdict {
  QSO_VERDICT_CONVERGED_TO_CENTER = 0,
  QSO_VERDICT_CYCLE_DETECTED = 1,
  QSO_VERDICT_BUDGET_EXHAUSTED = 2,
} QsoVerdict;

/**
 * Opaque finite Abelian group.
 */
typedef struct QsoGroup QsoGroup;

/**
 * Opaque group-induced operator.
 */
typedef struct QsoOperator QsoOperator;

/**
 * Outcome of [`qso_iterate`]. `preperiod`/`period` are 0 unless a cycle was found.
 */
typedef struct QsoTrajectorySummary {
  size_t steps;
  enum QsoVerdict verdict;
  size_t preperiod;
  size_t period;
  double initial_sup_norm;
  double final_sup_norm;
  double final_center_distance;
  double max_sup_norm_increase;
} QsoTrajectorySummary;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread; empty if none.
 * The pointer stays valid until the next failing call on the same thread.
 */
const char *qso_last_error_message(void);

/**
 * Parses a descriptor such as `"Z4xZ2"`.
 *
 * # Safety
 * `descriptor` must be a NUL-terminated string; `out` must be writable.
 */
enum QsoStatus qso_group_parse(const char *descriptor, struct QsoGroup **out);

/**
 * `|G|`, or 0 for a null handle.
 *
 * # Safety
 * `group` must be null or a live handle from [`qso_group_parse`].
 */
size_t qso_group_order(const struct QsoGroup *group);

/**
 * # Safety
 * `group` must be null or a handle from [`qso_group_parse`] not yet freed.
 */
void qso_group_free(struct QsoGroup *group);

/**
 * Builds the operator for the subgroup generated by `generators` (flat
 * indices) and the measure `mu` (`|G|` weights, or NULL for uniform).
 *
 * # Safety
 * `group` must be a live handle; `generators` must hold `n_generators`
 * values (may be NULL when zero); `mu` must be NULL or hold `mu_len` values;
 * `out` must be writable.
 */
enum QsoStatus qso_operator_new(const struct QsoGroup *group,
                                const size_t *generators,
                                size_t n_generators,
                                const double *mu,
                                size_t mu_len,
                                struct QsoOperator **out);

/**
 * `|G|` of the operator's group, or 0 for a null handle.
 *
 * # Safety
 * `op` must be null or a live handle.
 */
size_t qso_operator_order(const struct QsoOperator *op);

/**
 * Writes `V(x)` into `out`. Both buffers hold `len = |G|` values.
 *
 * # Safety
 * `op` must be a live handle; `x` and `out` must hold `len` values.
 */
enum QsoStatus qso_operator_apply(const struct QsoOperator *op,
                                  const double *x,
                                  size_t len,
                                  double *out);

/**
 * # Safety
 * `op` must be null or a handle from [`qso_operator_new`] not yet freed.
 */
void qso_operator_free(struct QsoOperator *op);

/**
 * Iterates from `x0` until within `tol` of the center, a cycle, or
 * `max_steps`. `final_state` may be NULL; otherwise it receives `len` values.
 *
 * # Safety
 * `op` must be a live handle; `x0` must hold `len` values; `summary` must
 * be writable; `final_state` must be NULL or hold `len` values.
 */
enum QsoStatus qso_iterate(const struct QsoOperator *op,
                           const double *x0,
                           size_t len,
                           size_t max_steps,
                           double tol,
                           struct QsoTrajectorySummary *summary,
                           double *final_state);

/**
 * The envelope `f(p)` for `p` in `(0, 1]`.
 *
 * # Safety
 * `out` must be writable.
 */
enum QsoStatus qso_envelope_f(double p, double *out);

/**
 * Seeded uniform sample from the open simplex on `group`.
 *
 * # Safety
 * `group` must be a live handle; `out` must hold `len = |G|` values.
 */
enum QsoStatus qso_sample_interior(const struct QsoGroup *group,
                                   uint64_t seed,
                                   double *out,
                                   size_t len);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* QSO_LAB_H */
