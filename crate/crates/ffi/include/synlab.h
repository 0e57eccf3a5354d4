/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#ifndef SYNLAB_H
#define SYNLAB_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum SynlabStatus {
  SYNLAB_STATUS_OK = 0,
  SYNLAB_STATUS_NULL_POINTER,
  SYNLAB_STATUS_PANIC,
  SYNLAB_STATUS_NON_CONVERGENCE,
  SYNLAB_STATUS_DIMENSION_MISMATCH,
  SYNLAB_STATUS_DOMAIN_ERROR,
  SYNLAB_STATUS_NOT_POSITIVE,
  SYNLAB_STATUS_NOT_STRICTLY_POSITIVE,
  SYNLAB_STATUS_NOT_INVERTIBLE,
  SYNLAB_STATUS_NOT_PROJECTION,
  SYNLAB_STATUS_NOT_EFFECT,
  SYNLAB_STATUS_NOT_SYMMETRY,
  SYNLAB_STATUS_INVARIANT_VIOLATION,
  SYNLAB_STATUS_SUPPORT_VIOLATION,
  SYNLAB_STATUS_ALGEBRA_MISMATCH,
  SYNLAB_STATUS_UNIT_MISSING,
  SYNLAB_STATUS_PRECONDITION_UNMET,
  SYNLAB_STATUS_NOT_A_WITNESS_PAIR,
  SYNLAB_STATUS_NOT_FACTOR,
  SYNLAB_STATUS_NOT_ORTHOGONAL,
  SYNLAB_STATUS_ZERO_PROJECTION,
  SYNLAB_STATUS_NOT_EXCHANGING,
  SYNLAB_STATUS_TRIVIAL_PROJECTION,
  SYNLAB_STATUS_HYPOTHESIS_VIOLATION,
  SYNLAB_STATUS_INVALID_TOLERANCE,
  SYNLAB_STATUS_PARSE_ERROR,
  SYNLAB_STATUS_VALIDATION_ERROR,
  SYNLAB_STATUS_UNKNOWN_COMMAND,
} SynlabStatus;

typedef enum SynlabInfimum {
  SYNLAB_INFIMUM_EXISTS = 0,
  SYNLAB_INFIMUM_NOT_EXISTS = 1,
  SYNLAB_INFIMUM_UNKNOWN = 2,
} SynlabInfimum;

/**
 * Opaque handle to a block structure.
 */
typedef struct SynlabAlgebra SynlabAlgebra;

/**
 * Opaque handle to an element of an algebra.
 */
typedef struct SynlabElement SynlabElement;

/**
 * Numerical tolerances; see the core library for their meaning.
 */
typedef struct SynlabTolerances {
  double eig;
  double recon;
  double ortho;
  double psd;
} SynlabTolerances;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * The default tolerance set.
 */
struct SynlabTolerances synlab_tolerances_default(void);

/**
 * Stable name of a status code, e.g. `"NotProjection"`. Never null.
 */
const char *synlab_status_name(enum SynlabStatus status);

/**
 * Message of the last failed call on this thread; empty after a success.
 * Valid until the next call into the library on this thread.
 */
const char *synlab_last_error_message(void);

/**
 * Creates the algebra with block sizes `blocks[0..len]`.
 *
 * # Safety
 * `blocks` must point to `len` readable values; `out` must be writable.
 */
enum SynlabStatus synlab_algebra_new(const size_t *blocks, size_t len, struct SynlabAlgebra **out);

/**
 * # Safety
 * `algebra` must be null or a handle from [`synlab_algebra_new`] not yet freed.
 */
void synlab_algebra_free(struct SynlabAlgebra *algebra);

/**
 * Matrix size of the algebra's elements, or 0 for a null handle.
 *
 * # Safety
 * `algebra` must be null or a live handle.
 */
size_t synlab_algebra_total_dim(const struct SynlabAlgebra *algebra);

/**
 * # Safety
 * `algebra` must be a live handle; `out` must be writable.
 */
enum SynlabStatus synlab_algebra_is_factor(const struct SynlabAlgebra *algebra,
                                           const struct SynlabTolerances *tol,
                                           bool *out);

/**
 * Creates an element from `n × n` row-major entries, `n` the algebra's
 * total dimension. The input must be symmetric and block diagonal.
 *
 * # Safety
 * `entries` must point to `len` readable values; `out` must be writable.
 */
enum SynlabStatus synlab_element_new(const struct SynlabAlgebra *algebra,
                                     const double *entries,
                                     size_t len,
                                     const struct SynlabTolerances *tol,
                                     struct SynlabElement **out);

/**
 * # Safety
 * `element` must be null or a handle not yet freed.
 */
void synlab_element_free(struct SynlabElement *element);

/**
 * Matrix size of the element, or 0 for a null handle.
 *
 * # Safety
 * `element` must be null or a live handle.
 */
size_t synlab_element_dim(const struct SynlabElement *element);

/**
 * Copies the `n × n` row-major entries into `out[0..len]`.
 *
 * # Safety
 * `out` must point to `len` writable values.
 */
enum SynlabStatus synlab_element_copy(const struct SynlabElement *element, double *out, size_t len);

/**
 * The carrier (range projection) of `a`.
 *
 * # Safety
 * `a` must be a live handle; `out` must be writable.
 */
enum SynlabStatus synlab_carrier(const struct SynlabElement *a,
                                 const struct SynlabTolerances *tol,
                                 struct SynlabElement **out);

/**
 * Meet of two projections in the projection lattice.
 *
 * # Safety
 * `p`, `q` must be live handles; `out` must be writable.
 */
enum SynlabStatus synlab_meet(const struct SynlabElement *p,
                              const struct SynlabElement *q,
                              const struct SynlabTolerances *tol,
                              struct SynlabElement **out);

/**
 * Join of two projections in the projection lattice.
 *
 * # Safety
 * `p`, `q` must be live handles; `out` must be writable.
 */
enum SynlabStatus synlab_join(const struct SynlabElement *p,
                              const struct SynlabElement *q,
                              const struct SynlabTolerances *tol,
                              struct SynlabElement **out);

/**
 * Decides whether the infimum of `c` and `d` exists in their algebra. On
 * `Exists`, `*value` receives a new handle to it; otherwise `*value` is set
 * to null. `value` may be null when only the decision is wanted.
 *
 * # Safety
 * `c`, `d` must be live handles; `status` must be writable.
 */
enum SynlabStatus synlab_infimum(const struct SynlabElement *c,
                                 const struct SynlabElement *d,
                                 const struct SynlabTolerances *tol,
                                 enum SynlabInfimum *status,
                                 struct SynlabElement **value);

/**
 * Runs the antilattice suite and returns its report as a JSON string, to be
 * released with [`synlab_string_free`].
 *
 * # Safety
 * `algebra` must be a live handle; `out` must be writable.
 */
enum SynlabStatus synlab_suite_json(const struct SynlabAlgebra *algebra,
                                    size_t trials,
                                    uint64_t seed,
                                    const struct SynlabTolerances *tol,
                                    char **out);

/**
 * # Safety
 * `s` must be null or a string returned by this library, not yet freed.
 */
void synlab_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SYNLAB_H */
