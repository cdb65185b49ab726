#ifndef QPLANE_H
#define QPLANE_H

/* generated by cbindgen from the qplane-ffi crate; do not edit */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Result discipline of every fallible call.
typedef enum QpStatus {
  // success
  QP_OK = 0,
  // a pointer or encoded argument was unusable
  QP_INVALID_ARGUMENT = 1,
  // a mathematical check rejected the input
  QP_MATH_ERROR = 2,
  // an internal invariant failed
  QP_INTERNAL = 3,
} QpStatus;

// Opaque result of a stratification, sweep, or identity check.
typedef struct QpReport QpReport;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Stratify a point of the quantum plane given by central coordinates
// "u,v,w,g" (cyclotomic polynomial strings in z). A monomial witness is
// searched first.
//
// # Safety
// `point` must be a valid NUL-terminated string; `out` must be a valid
// pointer to a `QpReport*` slot.
enum QpStatus qp_plane_stratify(uint32_t n, const char *point, struct QpReport **out);

// Stratify a point of a blow-up algebra. `ideal` is "xz" or "xyz"; `point`
// holds the three family parameters; `twist` is the extra rho exponent of
// the z-image (origin blow-up only).
//
// # Safety
// `ideal` and `point` must be valid NUL-terminated strings; `out` must be a
// valid pointer to a `QpReport*` slot.
enum QpStatus qp_blowup_stratify(uint32_t n,
                                 const char *ideal,
                                 const char *point,
                                 int64_t twist,
                                 struct QpReport **out);

// Stratify a point of a chart section algebra. `chart` is "line" or
// "origin"; `point` holds the three family parameters.
//
// # Safety
// `chart` and `point` must be valid NUL-terminated strings; `out` must be a
// valid pointer to a `QpReport*` slot.
enum QpStatus qp_chart_stratify(uint32_t n,
                                const char *chart,
                                const char *point,
                                struct QpReport **out);

// Sweep the canonical point family of an algebra. `algebra` is "plane",
// "xz", or "xyz".
//
// # Safety
// `algebra` must be a valid NUL-terminated string; `out` must be a valid
// pointer to a `QpReport*` slot.
enum QpStatus qp_sweep(uint32_t n, const char *algebra, struct QpReport **out);

// Verify the finite Heisenberg pair identities for every unit exponent.
// Returns `QpMathError` if any identity fails.
//
// # Safety
// `out` must be a valid pointer to a `QpReport*` slot.
enum QpStatus qp_heis_check(uint32_t n, struct QpReport **out);

// Serialize a report as pretty-printed JSON inside the versioned
// conventions envelope. The string must be released with
// `qp_string_free`.
//
// # Safety
// `report` must be a live handle from this library; `out` must be a valid
// pointer to a `char*` slot.
enum QpStatus qp_report_json(const struct QpReport *report, char **out);

// Render the quiver of a stratification report in Graphviz DOT form.
// Fails with `QpInvalidArgument` for sweep or identity-check reports.
// The string must be released with `qp_string_free`.
//
// # Safety
// `report` must be a live handle from this library; `out` must be a valid
// pointer to a `char*` slot.
enum QpStatus qp_report_dot(const struct QpReport *report, char **out);

// Release a report handle. NULL is ignored.
//
// # Safety
// `report` must be NULL or a handle produced by this library that has not
// been freed yet.
void qp_report_free(struct QpReport *report);

// Release a string produced by this library. NULL is ignored.
//
// # Safety
// `s` must be NULL or a string produced by this library that has not been
// freed yet.
void qp_string_free(char *s);

// Thread-local description of the last failure, or NULL if the most recent
// call on this thread succeeded. The pointer is owned by the library and
// valid until the next fallible call on the same thread.
const char *qp_last_error(void);

// Library version as a static string; do not free.
const char *qp_version(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* QPLANE_H */
