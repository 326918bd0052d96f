#ifndef CICHON_H
#define CICHON_H

/* Generated by cbindgen from src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum {
  CICHON_STATUS_OK = 0,
  CICHON_STATUS_NULL_POINTER = 1,
  CICHON_STATUS_INVALID_UTF8 = 2,
  CICHON_STATUS_PARSE_ERROR = 3,
  CICHON_STATUS_PRECONDITION = 4,
  CICHON_STATUS_UNKNOWN_NAME = 5,
} CichonStatus;

/**
 * Opaque forcing condition.
 */
typedef struct CichonCondition CichonCondition;

/**
 * Opaque diagram state.
 */
typedef struct CichonState CichonState;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message describing the most recent failure on this thread, or NULL.
 * The pointer stays valid until the next failing call on this thread.
 */
const char *cichon_last_error(void);

/**
 * Releases a string returned by this library. NULL is ignored.
 *
 * # Safety
 * `s` must come from this library and not have been freed already.
 */
void cichon_string_free(char *s);

/**
 * Parses a condition from its tagged JSON form.
 *
 * # Safety
 * `json` must be a NUL-terminated string; `out` must be writable.
 */
CichonStatus cichon_condition_from_json(const char *json, CichonCondition **out);

/**
 * # Safety
 * `cond` must be NULL or a handle from this library not freed already.
 */
void cichon_condition_free(CichonCondition *cond);

/**
 * # Safety
 * `cond` must be a live handle; `out` must be writable.
 */
CichonStatus cichon_condition_to_json(const CichonCondition *cond, char **out);

/**
 * Writes whether the condition satisfies every clause of its kind. The
 * violated clauses, if any, are reported through `cichon_last_error`.
 *
 * # Safety
 * `cond` must be a live handle; `out_valid` must be writable.
 */
CichonStatus cichon_condition_validate(const CichonCondition *cond, bool *out_valid);

/**
 * `a ≤ b` in the poset named by `kind`.
 *
 * # Safety
 * `kind` must be a NUL-terminated string, `a` and `b` live handles, `out` writable.
 */
CichonStatus cichon_leq(const char *kind,
                        const CichonCondition *a,
                        const CichonCondition *b,
                        bool *out);

/**
 * `a ≤_n b` for `sacks`, `laver` or `product`.
 *
 * # Safety
 * As for [`cichon_leq`].
 */
CichonStatus cichon_fusion_leq(const char *kind,
                               const CichonCondition *a,
                               const CichonCondition *b,
                               uintptr_t n,
                               bool *out);

/**
 * Projects a localization condition along `map` (`"loc-d"` or `"loc-e"`).
 *
 * # Safety
 * `map` must be a NUL-terminated string, `cond` a live handle, `out` writable.
 */
CichonStatus cichon_project(const char *map, const CichonCondition *cond, CichonCondition **out);

/**
 * Lifts `target` (Hechler for `"loc-d"`, E for `"loc-e"`) along the projection from `cond`.
 *
 * # Safety
 * As for [`cichon_project`]; `target` must be a live handle.
 */
CichonStatus cichon_lift(const char *map,
                         const CichonCondition *cond,
                         const CichonCondition *target,
                         CichonCondition **out);

/**
 * Least threshold of `f R g` for `relation` in `leq`, `neq`, `in`
 * (`g` is a slalom for `in`). Both arguments are JSON.
 *
 * # Safety
 * All pointers must be valid; strings NUL-terminated.
 */
CichonStatus cichon_check(const char *relation,
                          const char *f_json,
                          const char *g_json,
                          uintptr_t *out_threshold,
                          bool *out_vacuous);

/**
 * Knowledge-base profile of a named forcing.
 *
 * # Safety
 * `name` must be NUL-terminated; `out` writable.
 */
CichonStatus cichon_kb_lookup(const char *name, CichonState **out);

/**
 * # Safety
 * `state` must be NULL or a handle from this library not freed already.
 */
void cichon_state_free(CichonState *state);

/**
 * # Safety
 * `state` must be a live handle; `out` writable.
 */
CichonStatus cichon_state_to_json(const CichonState *state, char **out);

/**
 * # Safety
 * `state` must be a live handle; `out` writable.
 */
CichonStatus cichon_state_to_dot(const CichonState *state, char **out);

/**
 * Number of nodes marked nonempty.
 *
 * # Safety
 * `state` must be a live handle; `out` writable.
 */
CichonStatus cichon_state_nonempty_count(const CichonState *state, uintptr_t *out);

/**
 * All cuts with their realizing forcings, as a JSON array.
 *
 * # Safety
 * `out` must be writable.
 */
CichonStatus cichon_cuts_json(char **out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* CICHON_H */
