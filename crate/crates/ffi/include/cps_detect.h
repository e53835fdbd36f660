#ifndef CPS_DETECT_H
#define CPS_DETECT_H

/* Generated by cbindgen. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/*
 Monitor class for `cps_detect`.
 */
typedef enum CpsMonitor {
  CPS_MONITOR_STATIC = 0,
  CPS_MONITOR_DYNAMIC = 1,
  CPS_MONITOR_ACTIVE = 2,
} CpsMonitor;

/*
 Result code of every fallible call.
 */
typedef enum CpsStatus {
  CPS_STATUS_OK = 0,
  CPS_STATUS_NULL_POINTER = 1,
  CPS_STATUS_INVALID_UTF8 = 2,
  /*
   Malformed or inconsistent input data.
   */
  CPS_STATUS_DATA_ERROR = 3,
  /*
   The analysis could not reach a verdict (singular pencil, not index one, ...).
   */
  CPS_STATUS_ANALYSIS_ERROR = 4,
  CPS_STATUS_BUDGET_EXCEEDED = 5,
  CPS_STATUS_PANIC = 6,
} CpsStatus;

/*
 Opaque descriptor system.
 */
typedef struct CpsSystem CpsSystem;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/*
 Parses a JSON system file and stores a new handle in `*out`.

 # Safety
 `json` must be a valid NUL-terminated string and `out` a valid pointer.
 */
enum CpsStatus cps_system_from_json(const char *json, struct CpsSystem **out);

/*
 Releases a handle. Null is ignored.

 # Safety
 `sys` must come from `cps_system_from_json` and not be freed twice.
 */
void cps_system_free(struct CpsSystem *sys);

/*
 Writes the state and output dimensions.

 # Safety
 All pointers must be valid.
 */
enum CpsStatus cps_system_dims(const struct CpsSystem *sys, size_t *n, size_t *p);

/*
 Invariant zeros of the attack signature as a JSON array.

 # Safety
 `attack` must point to `len` channel indices (1-based); `out` must be valid.
 */
enum CpsStatus cps_zeros(const struct CpsSystem *sys, const size_t *attack, size_t len, char **out);

/*
 Detectability verdict as JSON.

 # Safety
 As for `cps_zeros`.
 */
enum CpsStatus cps_detect(const struct CpsSystem *sys,
                          const size_t *attack,
                          size_t len,
                          enum CpsMonitor monitor,
                          uint64_t seed,
                          char **out);

/*
 Dynamic identifiability verdict as JSON. Returns `BudgetExceeded` when
 more than `budget` alternative sets would have to be examined.

 # Safety
 As for `cps_zeros`.
 */
enum CpsStatus cps_identify(const struct CpsSystem *sys,
                            const size_t *attack,
                            size_t len,
                            size_t budget,
                            uint64_t seed,
                            char **out);

/*
 Structural left-invertibility from the numeric sparsity pattern.

 # Safety
 As for `cps_zeros`.
 */
enum CpsStatus cps_structural(const struct CpsSystem *sys,
                              const size_t *attack,
                              size_t len,
                              char **out);

/*
 Message of the last failed call on this thread, or null. The pointer
 stays valid until the next call on the same thread.
 */
const char *cps_last_error(void);

/*
 Releases a string returned by this library. Null is ignored.

 # Safety
 `s` must come from this library and not be freed twice.
 */
void cps_string_free(char *s);

/*
 Library version as a static NUL-terminated string.
 */
const char *cps_version(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* CPS_DETECT_H */
