#ifndef ZOMAT_H
#define ZOMAT_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Largest order accepted by [`zom_extension_first_missing`]; the sweep visits
// `2^(2n+1)` borders.
#define ZOM_MAX_EXTENSION_ORDER 14

// Result codes.
typedef enum ZomStatus {
  ZOM_STATUS_OK = 0,
  ZOM_STATUS_NULL_POINTER = 1,
  // Text input is not valid UTF-8 or not a matrix.
  ZOM_STATUS_PARSE = 2,
  // Wrong order, or an output buffer that is too short.
  ZOM_STATUS_DIMENSION = 3,
  ZOM_STATUS_OVERFLOW = 4,
  ZOM_STATUS_DOMAIN = 5,
  // A panic was caught at the boundary.
  ZOM_STATUS_INTERNAL = 6,
} ZomStatus;

// An order-`n` (0,1) matrix.
typedef struct ZomMatrix ZomMatrix;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// The message of the last failed call on this thread, or NULL. The pointer
// stays valid until the next failing call on the same thread.
const char *zom_last_error(void);

// Parses comma-separated hexadecimal rows such as `"3,5,6"`.
//
// # Safety
// `rows` must be a NUL-terminated string and `out` a valid pointer.
enum ZomStatus zom_matrix_from_hex(const char *rows, struct ZomMatrix **out);

// Releases a matrix. NULL is ignored.
//
// # Safety
// `m` must come from this library and not be freed twice.
void zom_matrix_free(struct ZomMatrix *m);

// # Safety
// `m` must be a live handle and `out` a valid pointer.
enum ZomStatus zom_matrix_order(const struct ZomMatrix *m, size_t *out);

// Hexadecimal rows of the matrix; release with [`zom_string_free`].
//
// # Safety
// `m` must be a live handle and `out` a valid pointer.
enum ZomStatus zom_matrix_to_hex(const struct ZomMatrix *m, char **out);

// Releases a string returned by this library. NULL is ignored.
//
// # Safety
// `s` must come from this library and not be freed twice.
void zom_string_free(char *s);

// Exact determinant; `ZOM_STATUS_OVERFLOW` if it does not fit 64 bits.
//
// # Safety
// `m` must be a live handle and `out` a valid pointer.
enum ZomStatus zom_matrix_determinant(const struct ZomMatrix *m, int64_t *out);

// # Safety
// `m` must be a live handle and `out` a valid pointer.
enum ZomStatus zom_matrix_rank(const struct ZomMatrix *m, size_t *out);

// Writes the Smith normal form diagonal into `diag`, which must hold at
// least `order` entries.
//
// # Safety
// `m` must be a live handle and `diag` valid for `len` writes.
enum ZomStatus zom_matrix_snf(const struct ZomMatrix *m, uint64_t *diag, size_t len);

// Lex-smallest matrix reachable by row and column permutations.
//
// # Safety
// `m` must be a live handle and `out` a valid pointer.
enum ZomStatus zom_matrix_pi_rep(const struct ZomMatrix *m, struct ZomMatrix **out);

// Lex-smallest matrix of the φ-orbit.
//
// # Safety
// `m` must be a live handle and `out` a valid pointer.
enum ZomStatus zom_matrix_phi_rep(const struct ZomMatrix *m, struct ZomMatrix **out);

// Smallest nonnegative integer that is not `|det|` of any border of `m`.
//
// # Safety
// `m` must be a live handle and `out` a valid pointer.
enum ZomStatus zom_extension_first_missing(const struct ZomMatrix *m, uint64_t *out);

// Number of π-classes of order-`n` matrices, as a decimal string; release
// with [`zom_string_free`].
//
// # Safety
// `out` must be a valid pointer.
enum ZomStatus zom_pi_class_count(size_t n, char **out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* ZOMAT_H */
