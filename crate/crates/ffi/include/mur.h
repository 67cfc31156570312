/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#ifndef MUR_H
#define MUR_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Result codes.
typedef enum MurStatus {
  MUR_STATUS_OK = 0,
  MUR_STATUS_NULL_POINTER = 1,
  // Malformed input: bad name, bad JSON, invalid state or distribution.
  MUR_STATUS_INVALID_INPUT = 2,
  // Dimension, arity or size-limit violation.
  MUR_STATUS_SEMANTIC = 3,
  // The measure is undefined on this input (log-product with zeros).
  MUR_STATUS_UNDEFINED = 4,
  MUR_STATUS_BUFFER_TOO_SMALL = 5,
  // A Rust panic was caught at the boundary.
  MUR_STATUS_INTERNAL = 6,
} MurStatus;

// Bound construction selector for [`mur_bound`].
typedef enum MurBoundKind {
  MUR_BOUND_KIND_DIRECT_PRODUCT = 0,
  MUR_BOUND_KIND_DIRECT_SUM = 1,
  // Two-measurement direct sum scaled by 1/2.
  MUR_BOUND_KIND_NORMALIZED_DIRECT_SUM = 2,
} MurBoundKind;

// Opaque orthonormal basis.
typedef struct MurBasis MurBasis;

// Opaque cumulative bound profile.
typedef struct MurProfile MurProfile;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the last failed call on this thread, or null. Valid until the
// next failing call on the same thread.
const char *mur_last_error_message(void);

// Built-in basis by name: "A", "B", "C1", "C2", "C3".
//
// # Safety
// `name` must be a NUL-terminated string; `out` must be writable.
enum MurStatus mur_basis_builtin(const char *name, struct MurBasis **out);

// Basis from the JSON basis-file format (`dim`, `vectors` of `[re, im]`
// columns, `label`).
//
// # Safety
// `json` must be a NUL-terminated string; `out` must be writable.
enum MurStatus mur_basis_from_json(const char *json, struct MurBasis **out);

// Basis from `dim * dim` real and imaginary parts, vector `j` stored at
// `[j * dim, (j + 1) * dim)`. `label` may be null.
//
// # Safety
// `re` and `im` must point to `dim * dim` doubles; `out` must be writable.
enum MurStatus mur_basis_new(size_t dim,
                             const double *re,
                             const double *im,
                             const char *label,
                             struct MurBasis **out);

// Dimension of `basis`, 0 for null.
//
// # Safety
// `basis` must be null or a live handle.
size_t mur_basis_dim(const struct MurBasis *basis);

// # Safety
// `basis` must be null or a handle not yet freed.
void mur_basis_free(struct MurBasis *basis);

// Bound profile of `count` measurements.
//
// # Safety
// `bases` must point to `count` live basis handles; `out` must be writable.
enum MurStatus mur_bound(const struct MurBasis *const *bases,
                         size_t count,
                         int32_t kind,
                         struct MurProfile **out);

// Number of cumulative entries, 0 for null.
//
// # Safety
// `profile` must be null or a live handle.
size_t mur_profile_len(const struct MurProfile *profile);

// Cumulative values `Omega_1, ..., Omega_n`.
//
// # Safety
// `buf` must hold `capacity` doubles; `written` must be writable.
enum MurStatus mur_profile_omega(const struct MurProfile *profile,
                                 double *buf,
                                 size_t capacity,
                                 size_t *written);

// Increments `Omega_k - Omega_{k-1}`.
//
// # Safety
// As for [`mur_profile_omega`].
enum MurStatus mur_profile_increments(const struct MurProfile *profile,
                                      double *buf,
                                      size_t capacity,
                                      size_t *written);

// Shannon entropy of the increments, in bits.
//
// # Safety
// `profile` must be a live handle; `out` must be writable.
enum MurStatus mur_profile_entropy(const struct MurProfile *profile, double *out);

// Profile as JSON; release the string with [`mur_string_free`].
//
// # Safety
// `profile` must be a live handle; `out` must be writable.
enum MurStatus mur_profile_to_json(const struct MurProfile *profile, char **out);

// # Safety
// `profile` must be null or a handle not yet freed.
void mur_profile_free(struct MurProfile *profile);

// # Safety
// `s` must be null or a string returned by this library and not yet freed.
void mur_string_free(char *s);

// Outcome probabilities of the normalized pure state `re + i im` measured
// in `basis`.
//
// # Safety
// `re`, `im` and `out` must each hold `dim` doubles.
enum MurStatus mur_born_probabilities(const struct MurBasis *basis,
                                      const double *re,
                                      const double *im,
                                      size_t dim,
                                      double *out);

// Evaluates the named measure ("shannon", "sum", "max", "s-minus-m",
// "log-product", "min-entropy") on a nonnegative vector.
//
// # Safety
// `name` must be NUL-terminated; `x` must hold `len` doubles.
enum MurStatus mur_measure_evaluate(const char *name, const double *x, size_t len, double *out);

// Whether `x` (total mass equal to the profile's) respects `profile` at
// every prefix within `tol`.
//
// # Safety
// `x` must hold `len` doubles; `profile` must be live; `out` writable.
enum MurStatus mur_dominated_by_profile(const double *x,
                                        size_t len,
                                        const struct MurProfile *profile,
                                        double tol,
                                        bool *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* MUR_H */
