#ifndef GRIDPLAN_H
#define GRIDPLAN_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result of a call.
 */
typedef enum GpStatus {
  GP_STATUS_OK = 0,
  GP_STATUS_NULL_POINTER = 1,
  GP_STATUS_INVALID_UTF8 = 2,
  GP_STATUS_IO = 3,
  GP_STATUS_PARSE = 4,
  GP_STATUS_VALIDATION = 5,
  GP_STATUS_CONFIG = 6,
  GP_STATUS_PLAN_MISMATCH = 7,
  GP_STATUS_INFEASIBLE = 8,
  GP_STATUS_NUMERICAL = 9,
  GP_STATUS_PANIC = 10,
} GpStatus;

/**
 * A parsed and validated study case.
 */
typedef struct GpCase GpCase;

/**
 * Run configuration.
 */
typedef struct GpConfig GpConfig;

/**
 * Expansion plan tied to the case it was read against.
 */
typedef struct GpPlan GpPlan;

/**
 * Outcome of a search.
 */
typedef struct GpSolution GpSolution;

/**
 * Evaluation of a given plan.
 */
typedef struct GpCost {
  /**
   * Discounted cost in dollars, penalties excluded.
   */
  double total;
  /**
   * Objective the planner minimises: cost plus constraint penalty.
   */
  double objective;
  /**
   * 1 when no constraint is violated.
   */
  int32_t feasible;
} GpCost;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread; empty after a success.
 * The pointer stays valid until the next call on the same thread.
 */
const char *gp_last_error(void);

/**
 * Library version as a static string.
 */
const char *gp_version(void);

/**
 * Load a case from a file path or bundled name.
 *
 * # Safety
 * `spec` must be a NUL-terminated string and `out` a writable pointer.
 */
enum GpStatus gp_case_load(const char *spec, struct GpCase **out);

/**
 * # Safety
 * `case` must come from [`gp_case_load`] and not be used afterwards.
 */
void gp_case_free(struct GpCase *case_);

/**
 * Number of buses, or 0 for a null handle.
 *
 * # Safety
 * `case` must be null or a live handle.
 */
size_t gp_case_bus_count(const struct GpCase *case_);

/**
 * SHA-256 of the case text as lowercase hex.
 *
 * # Safety
 * `case` must be a live handle and `out` a writable pointer. Release the
 * string with [`gp_string_free`].
 */
enum GpStatus gp_case_hash(const struct GpCase *case_, char **out);

/**
 * Load a configuration from a file path or bundled name. A null `spec`
 * gives the defaults.
 *
 * # Safety
 * `spec` must be null or NUL-terminated; `out` must be writable.
 */
enum GpStatus gp_config_load(const char *spec, struct GpConfig **out);

/**
 * # Safety
 * `cfg` must come from [`gp_config_load`] and not be used afterwards.
 */
void gp_config_free(struct GpConfig *cfg);

/**
 * Load a plan against `case`, padded to at least `min_stages` stages.
 *
 * # Safety
 * Pointers must be live handles or NUL-terminated strings; `out` writable.
 */
enum GpStatus gp_plan_load(const struct GpCase *case_,
                           const char *spec,
                           size_t min_stages,
                           struct GpPlan **out);

/**
 * Parse plan text (the plan file format) against `case`.
 *
 * # Safety
 * Pointers must be live handles or NUL-terminated strings; `out` writable.
 */
enum GpStatus gp_plan_parse(const struct GpCase *case_,
                            const char *plan_text,
                            size_t min_stages,
                            struct GpPlan **out);

/**
 * # Safety
 * `plan` must come from [`gp_plan_load`] or [`gp_plan_parse`] and not be used afterwards.
 */
void gp_plan_free(struct GpPlan *plan);

/**
 * Cost and check `plan` as `planner` would. `n_minus_1` non-zero adds
 * the single-contingency checks where the planner has them.
 *
 * # Safety
 * Handles must be live, `planner` NUL-terminated, `out` writable.
 */
enum GpStatus gp_evaluate(const struct GpCase *case_,
                          const struct GpConfig *cfg,
                          const struct GpPlan *plan,
                          const char *planner,
                          int32_t n_minus_1,
                          struct GpCost *out);

/**
 * Search for a plan. `planner` is any planner name, or `ip-tnep` for the
 * interior-point solver (which ignores the seed). The same inputs and seed
 * always give the same solution.
 *
 * # Safety
 * Handles must be live, `planner` NUL-terminated, `out` writable.
 */
enum GpStatus gp_solve(const struct GpCase *case_,
                       const struct GpConfig *cfg,
                       const char *planner,
                       uint64_t seed,
                       int32_t n_minus_1,
                       struct GpSolution **out);

/**
 * # Safety
 * `sol` must come from [`gp_solve`] and not be used afterwards.
 */
void gp_solution_free(struct GpSolution *sol);

/**
 * Cost summary of a solution.
 *
 * # Safety
 * `sol` must be a live handle and `out` writable.
 */
enum GpStatus gp_solution_cost(const struct GpSolution *sol, struct GpCost *out);

/**
 * The solution's plan in the plan file format; the result can be written
 * read back with [`gp_plan_parse`].
 *
 * # Safety
 * `sol` must be a live handle and `out` writable. Release the string with
 * [`gp_string_free`].
 */
enum GpStatus gp_solution_plan(const struct GpSolution *sol, char **out);

/**
 * # Safety
 * `s` must be null or a string returned by this library.
 */
void gp_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* GRIDPLAN_H */
