#ifndef KANVEX_H
#define KANVEX_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum KxStatus {
  KX_STATUS_OK = 0,
  KX_STATUS_NULL_POINTER = 1,
  KX_STATUS_INVALID_ARGUMENT = 2,
  KX_STATUS_PARSE = 3,
  KX_STATUS_OUT_OF_DOMAIN = 4,
  KX_STATUS_NOT_MONOTONE = 5,
  KX_STATUS_NUMERICAL = 6,
  KX_STATUS_PANIC = 7,
} KxStatus;

typedef enum KxSegmentKind {
  KX_SEGMENT_KIND_POLY = 0,
  KX_SEGMENT_KIND_AFFINE = 1,
} KxSegmentKind;

typedef enum KxSolveStatus {
  KX_SOLVE_STATUS_OPTIMAL = 0,
  KX_SOLVE_STATUS_ITERATION_LIMIT = 1,
  KX_SOLVE_STATUS_INFEASIBLE_MASTER = 2,
} KxSolveStatus;

/**
 * Opaque convex or concave envelope of a polynomial on an interval.
 */
typedef struct KxEnvelope KxEnvelope;

/**
 * Opaque polynomial KAN.
 */
typedef struct KxPkan KxPkan;

/**
 * One envelope piece. `slope` and `intercept` are zero for `POLY` pieces.
 */
typedef struct KxSegment {
  enum KxSegmentKind kind;
  double from;
  double to;
  double slope;
  double intercept;
} KxSegment;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or NULL. Valid until the
 * next failing call on the same thread.
 */
const char *kx_last_error(void);

/**
 * Releases a string returned by this library. NULL is ignored.
 *
 * # Safety
 * `s` must come from a `kx_*` function returning `char *` and not be freed twice.
 */
void kx_string_free(char *s);

/**
 * Convex envelope of `sum coeffs[i] x^i` on `[lo, hi]`.
 *
 * # Safety
 * `coeffs` must point to `len` doubles; `out` must be writable.
 */
enum KxStatus kx_envelope_build(const double *coeffs,
                                size_t len,
                                double lo,
                                double hi,
                                double tol,
                                struct KxEnvelope **out);

/**
 * Concave envelope, `-e(-p)`.
 *
 * # Safety
 * As for [`kx_envelope_build`].
 */
enum KxStatus kx_concave_envelope_build(const double *coeffs,
                                        size_t len,
                                        double lo,
                                        double hi,
                                        double tol,
                                        struct KxEnvelope **out);

/**
 * # Safety
 * `env` must be a live handle; `out` must be writable.
 */
enum KxStatus kx_envelope_eval(const struct KxEnvelope *env, double x, double *out);

/**
 * A subgradient at `x`.
 *
 * # Safety
 * `env` must be a live handle; `out` must be writable.
 */
enum KxStatus kx_envelope_slope(const struct KxEnvelope *env, double x, double *out);

/**
 * Number of pieces; 0 for a NULL handle.
 *
 * # Safety
 * `env` must be NULL or a live handle.
 */
size_t kx_envelope_segment_count(const struct KxEnvelope *env);

/**
 * # Safety
 * `env` must be a live handle; `out` must be writable.
 */
enum KxStatus kx_envelope_segment(const struct KxEnvelope *env,
                                  size_t index,
                                  struct KxSegment *out);

/**
 * The envelope as JSON; free with [`kx_string_free`]. NULL on failure.
 *
 * # Safety
 * `env` must be a live handle.
 */
char *kx_envelope_to_json(const struct KxEnvelope *env);

/**
 * # Safety
 * `env` must be NULL or a handle not yet freed.
 */
void kx_envelope_free(struct KxEnvelope *env);

/**
 * Parses a network from its JSON form.
 *
 * # Safety
 * `json` must be a NUL-terminated string; `out` must be writable.
 */
enum KxStatus kx_pkan_from_json(const char *json, struct KxPkan **out);

/**
 * Random network of `layers` layers with the given hidden width, input
 * dimension and edge degree.
 *
 * # Safety
 * `out` must be writable.
 */
enum KxStatus kx_pkan_generate(size_t layers,
                               size_t width,
                               size_t inputs,
                               size_t degree,
                               uint64_t seed,
                               struct KxPkan **out);

/**
 * Input dimension; 0 for a NULL handle.
 *
 * # Safety
 * `net` must be NULL or a live handle.
 */
size_t kx_pkan_input_dim(const struct KxPkan *net);

/**
 * # Safety
 * `net` must be a live handle, `x` must point to `len` doubles and `out` must be writable.
 */
enum KxStatus kx_pkan_forward(const struct KxPkan *net, const double *x, size_t len, double *out);

/**
 * Lower bound on the network minimum over its input box, from the convex
 * relaxation. `status` may be NULL.
 *
 * # Safety
 * `net` must be a live handle; `out` must be writable; `status` NULL or writable.
 */
enum KxStatus kx_pkan_lower_bound(const struct KxPkan *net,
                                  double tol,
                                  double feas_tol,
                                  size_t max_iters,
                                  double *out,
                                  enum KxSolveStatus *status);

/**
 * Best value found by seeded multistart search, an upper bound on the
 * minimum. `x` receives the point if non-NULL and `len` matches the input dimension.
 *
 * # Safety
 * `net` must be a live handle; `out` writable; `x` NULL or `len` writable doubles.
 */
enum KxStatus kx_pkan_multistart(const struct KxPkan *net,
                                 size_t samples,
                                 uint64_t seed,
                                 double *out,
                                 double *x,
                                 size_t len);

/**
 * The network as JSON; free with [`kx_string_free`]. NULL on failure.
 *
 * # Safety
 * `net` must be a live handle.
 */
char *kx_pkan_to_json(const struct KxPkan *net);

/**
 * # Safety
 * `net` must be NULL or a handle not yet freed.
 */
void kx_pkan_free(struct KxPkan *net);

/**
 * Exact minimum of a monotone polynomial GAM given as JSON. `argmin`
 * receives the minimizer if non-NULL; `len` must then equal the dimension.
 *
 * # Safety
 * `json` must be NUL-terminated; `out` writable; `argmin` NULL or `len` writable doubles.
 */
enum KxStatus kx_gam_min(const char *json, double tol, double *out, double *argmin, size_t len);

/**
 * `|f_relax - f_star| / (|f_star| + 1e-12) * 100`.
 */
double kx_relative_gap(double f_relax, double f_star);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* KANVEX_H */
