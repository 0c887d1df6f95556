#ifndef GAMMAK_H
#define GAMMAK_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum GammakStatus {
  GAMMAK_STATUS_OK = 0,
  GAMMAK_STATUS_INVALID_ARGUMENT = 1,
  GAMMAK_STATUS_PRECISION_FAILURE = 2,
  GAMMAK_STATUS_NULL_POINTER = 3,
  GAMMAK_STATUS_INTERNAL = 4,
} GammakStatus;

/**
 * Opaque handle to an exact γ_k.
 */
typedef struct GammakGamma GammakGamma;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread, or NULL. Free with [`gammak_string_free`].
 */
char *gammak_last_error(void);

/**
 * # Safety
 * `s` must be NULL or a string returned by this library, not yet freed.
 */
void gammak_string_free(char *s);

/**
 * Compute γ_k exactly (1 <= k <= 7).
 *
 * # Safety
 * `out` must be a valid pointer.
 */
enum GammakStatus gammak_gamma_exact_new(uint32_t k, struct GammakGamma **out);

/**
 * # Safety
 * `g` must be NULL or a handle from [`gammak_gamma_exact_new`], not yet freed.
 */
void gammak_gamma_free(struct GammakGamma *g);

/**
 * # Safety
 * `g` must be a live handle.
 */
uint32_t gammak_gamma_k(const struct GammakGamma *g);

/**
 * Exact γ_k(c) as a reduced fraction `"p/q"`; `c` is a decimal or fraction string.
 *
 * # Safety
 * `g` must be a live handle, `c` a NUL-terminated string, `out` a valid pointer.
 */
enum GammakStatus gammak_gamma_eval(const struct GammakGamma *g, const char *c, char **out);

/**
 * γ_k(c) rounded to a double.
 *
 * # Safety
 * `g` must be a live handle and `out` a valid pointer.
 */
enum GammakStatus gammak_gamma_eval_f64(const struct GammakGamma *g, double c, double *out);

/**
 * JSON `{k, pieces:[{interval, coeffs_scaled, scale}]}`.
 *
 * # Safety
 * `g` must be a live handle and `out` a valid pointer.
 */
enum GammakStatus gammak_gamma_to_json(const struct GammakGamma *g, char **out);

/**
 * I(d) to `digits` significant digits, as a decimal string.
 *
 * # Safety
 * `out` must be a valid pointer.
 */
enum GammakStatus gammak_aliquot_i_d(uint32_t d, uint32_t digits, char **out);

/**
 * Taylor coefficient `c_m(k)` of `log D_k` as a fraction string.
 *
 * # Safety
 * `out` must be a valid pointer.
 */
enum GammakStatus gammak_toda_coeff(uint32_t m, uint32_t k, char **out);

/**
 * Painlevé V residual of `H_k` at `t` (decimal or fraction string). Writes the residual as a
 * decimal string and whether it is within the scaled tolerance `10^-(digits-15)`.
 *
 * # Safety
 * `t` must be a NUL-terminated string; `out_residual` and `out_pass` valid pointers.
 */
enum GammakStatus gammak_painleve_residual(uint32_t k,
                                           const char *t,
                                           uint32_t digits,
                                           char **out_residual,
                                           bool *out_pass);

/**
 * Library version, static storage.
 */
const char *gammak_version(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* GAMMAK_H */
