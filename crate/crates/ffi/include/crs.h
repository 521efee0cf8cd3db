#ifndef CRS_H
#define CRS_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/*
 Result codes shared by all functions.
 */
typedef enum CrsStatus {
  CRS_STATUS_OK = 0,
  /*
   Malformed instance, marginals or scheme name.
   */
  CRS_STATUS_INPUT_ERROR = 1,
  /*
   Out-of-range numeric parameter.
   */
  CRS_STATUS_PARAMETER_ERROR = 2,
  /*
   Well-formed request beyond what the routine supports.
   */
  CRS_STATUS_CAPABILITY_ERROR = 3,
  /*
   A required pointer was null.
   */
  CRS_STATUS_NULL_POINTER = 4,
  /*
   An output buffer is too small.
   */
  CRS_STATUS_BUFFER_TOO_SMALL = 5,
  /*
   Unexpected internal failure.
   */
  CRS_STATUS_INTERNAL_ERROR = 6,
} CrsStatus;

/*
 Opaque instance handle.
 */
typedef struct CrsInstance CrsInstance;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/*
 Message of the most recent failure on this thread; empty if none. Valid until the next
 failing call on the same thread.
 */
const char *crs_last_error_message(void);

/*
 Builds an instance from `edge_count` endpoint pairs and edge values.

 # Safety
 `us`, `vs` and `xs` must point to `edge_count` readable elements; `out` must be writable.
 */
enum CrsStatus crs_instance_new(size_t vertex_count,
                                const size_t *us,
                                const size_t *vs,
                                const double *xs,
                                size_t edge_count,
                                struct CrsInstance **out);

/*
 Parses an instance from its JSON representation.

 # Safety
 `json` must be a NUL-terminated string; `out` must be writable.
 */
enum CrsStatus crs_instance_from_json(const char *json, struct CrsInstance **out);

/*
 Releases an instance; null is ignored.

 # Safety
 `inst` must come from `crs_instance_new` or `crs_instance_from_json` and not be freed twice.
 */
void crs_instance_free(struct CrsInstance *inst);

/*
 Number of edges, or 0 for a null handle.

 # Safety
 `inst` must be null or a live handle.
 */
size_t crs_instance_edge_count(const struct CrsInstance *inst);

/*
 Optimal bipartite balancedness constant at `b ∈ [0, 1]`.

 # Safety
 `out` must be writable.
 */
enum CrsStatus crs_beta(double b, double *out);

/*
 General-matching balancedness constant `(1 − e^{−2b}) / (2b)`.

 # Safety
 `out` must be writable.
 */
enum CrsStatus crs_gamma(double b, double *out);

/*
 Samples one matching from the named procedure. Writes edge ids into `out_edges`
 (room for `capacity` ids) and the count into `out_len`.

 # Safety
 `inst` must be live, `scheme` NUL-terminated, and the output pointers writable.
 */
enum CrsStatus crs_resolve(const struct CrsInstance *inst,
                           const char *scheme,
                           uint64_t seed,
                           size_t *out_edges,
                           size_t capacity,
                           size_t *out_len);

/*
 Exact balancedness `E[y_e] / x_e` per edge (NaN outside `supp(x)`), plus the
 minimum over the support.

 # Safety
 `inst` must be live, `scheme` NUL-terminated, `out_values` writable for `len` entries.
 */
enum CrsStatus crs_exact_balancedness(const struct CrsInstance *inst,
                                      const char *scheme,
                                      double *out_values,
                                      size_t len,
                                      double *out_min);

/*
 Monte Carlo balancedness per edge with standard errors (NaN outside `supp(x)`).

 # Safety
 `inst` must be live, `scheme` NUL-terminated, both output arrays writable for `len` entries.
 */
enum CrsStatus crs_estimate_balancedness(const struct CrsInstance *inst,
                                         const char *scheme,
                                         uint64_t trials,
                                         uint64_t seed,
                                         double *out_values,
                                         double *out_std_errors,
                                         size_t len);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* CRS_H */
