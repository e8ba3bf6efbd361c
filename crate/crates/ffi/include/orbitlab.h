#ifndef ORBITLAB_H
#define ORBITLAB_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

// Result codes. Non-negative values coincide with the CLI exit codes.
typedef enum OrbitlabStatus {
  ORBITLAB_STATUS_OK = 0,
  ORBITLAB_STATUS_CONFIG = 1,
  ORBITLAB_STATUS_NOT_POWER_BOUNDED = 2,
  ORBITLAB_STATUS_TOL_AMBIGUOUS = 3,
  ORBITLAB_STATUS_PRECONDITION = 4,
  ORBITLAB_STATUS_EXHAUSTED = 5,
  ORBITLAB_STATUS_PARITY_FAILURE = 6,
  ORBITLAB_STATUS_NULL_POINTER = -1,
  ORBITLAB_STATUS_INVALID_UTF8 = -2,
  ORBITLAB_STATUS_PANIC = -3,
} OrbitlabStatus;

// Tail kinds for `orbitlab_vector_from_coords`.
typedef enum OrbitlabTailKind {
  ORBITLAB_TAIL_KIND_NULL = 0,
  ORBITLAB_TAIL_KIND_LIMIT = 1,
} OrbitlabTailKind;

// Commands for `orbitlab_run_json`.
typedef enum OrbitlabCommand {
  ORBITLAB_COMMAND_DECOMPOSE = 0,
  ORBITLAB_COMMAND_ANALYZE_ORBIT = 1,
  ORBITLAB_COMMAND_ANALYZE_DIFF = 2,
  ORBITLAB_COMMAND_WITNESS = 3,
  ORBITLAB_COMMAND_GALLERY = 4,
  ORBITLAB_COMMAND_LEMMA = 5,
} OrbitlabCommand;

// Opaque operator handle.
typedef struct OrbitlabOperator OrbitlabOperator;

// Opaque sequence-vector handle.
typedef struct OrbitlabVector OrbitlabVector;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the last failing call on this thread, or NULL.
// The pointer stays valid until the next failing call on this thread.
const char *orbitlab_last_error(void);

// Library version as a static NUL-terminated string.
const char *orbitlab_version(void);

// Release a string returned by this library. NULL is ignored.
//
// # Safety
// `s` must come from this library and must not be used afterwards.
void orbitlab_string_free(char *s);

// Diagonal operator with entries `exp(2 pi i num / 2^(n+1))`, optionally
// multiplied by `exp(2 pi i root_num / root_den)`.
//
// # Safety
// `out` must be a valid pointer to writable storage.
enum OrbitlabStatus orbitlab_operator_dyadic(int64_t num,
                                             int64_t root_num,
                                             uint64_t root_den,
                                             struct OrbitlabOperator **out);

// Dense `dim x dim` matrix from `2 dim^2` doubles, row-major, each entry
// stored as (re, im).
//
// # Safety
// `re_im` must point to `2 * dim * dim` readable doubles; `out` must be valid.
enum OrbitlabStatus orbitlab_operator_matrix(uintptr_t dim,
                                             const double *re_im,
                                             struct OrbitlabOperator **out);

// Operator from the JSON operator schema used by the command-line tool.
//
// # Safety
// `json` must be a NUL-terminated string; `out` must be valid.
enum OrbitlabStatus orbitlab_operator_from_json(const char *json, struct OrbitlabOperator **out);

// # Safety
// `op` must be NULL or a handle from this library, not used afterwards.
void orbitlab_operator_free(struct OrbitlabOperator *op);

// `sup_n ||T^n||` upper bound.
//
// # Safety
// `op` must be a valid handle and `m` writable.
enum OrbitlabStatus orbitlab_power_bound(const struct OrbitlabOperator *op, double *m);

// The all-ones sequence with `head_dim` explicit coordinates.
//
// # Safety
// `out` must be valid.
enum OrbitlabStatus orbitlab_vector_ones(uintptr_t head_dim, struct OrbitlabVector **out);

// Vector with `len` explicit coordinates (pairs of doubles) and a tail:
// a null envelope of size `bound`, or coordinates within `bound` of the
// limit `(limit_re, limit_im)`.
//
// # Safety
// `re_im` must point to `2 * len` readable doubles; `out` must be valid.
enum OrbitlabStatus orbitlab_vector_from_coords(const double *re_im,
                                                uintptr_t len,
                                                enum OrbitlabTailKind tail,
                                                double limit_re,
                                                double limit_im,
                                                double bound,
                                                struct OrbitlabVector **out);

// # Safety
// `v` must be NULL or a handle from this library, not used afterwards.
void orbitlab_vector_free(struct OrbitlabVector *v);

// Number of explicit coordinates.
//
// # Safety
// `v` must be a valid handle.
uintptr_t orbitlab_vector_dim(const struct OrbitlabVector *v);

// Certified enclosure `[lo, hi]` of the sup-norm.
//
// # Safety
// `v` must be a valid handle; `lo` and `hi` writable.
enum OrbitlabStatus orbitlab_vector_sup_norm(const struct OrbitlabVector *v,
                                             double *lo,
                                             double *hi);

// `T^n x` as a new vector.
//
// # Safety
// `op` and `x` must be valid handles; `out` writable.
enum OrbitlabStatus orbitlab_apply_power(const struct OrbitlabOperator *op,
                                         uint64_t n,
                                         const struct OrbitlabVector *x,
                                         struct OrbitlabVector **out);

// Residual of `T^{n+m} x - T^n x = sum_j (T^{n+j+1} x - T^{n+j} x)`.
//
// # Safety
// `op` and `x` must be valid handles; `residual` writable.
enum OrbitlabStatus orbitlab_telescope_check(const struct OrbitlabOperator *op,
                                             const struct OrbitlabVector *x,
                                             uint64_t n,
                                             uint64_t m,
                                             double *residual);

// Run a command on a JSON experiment configuration (the command-line
// schema) and return the primary JSON report in `out_json`.
//
// `param` is the difference step for `AnalyzeDiff`, `m` for the
// `mth-root` gallery and the trial count for `Lemma`; 0 means "take it
// from the configuration". `name` selects the gallery id or lemma name
// and may be NULL. The report is produced even when the status signals a
// domain outcome such as `NotPowerBounded` or `Exhausted`.
//
// # Safety
// `config_json` must be a NUL-terminated string. `name` is NULL or a
// NUL-terminated string; `out_json` must be writable.
enum OrbitlabStatus orbitlab_run_json(enum OrbitlabCommand command,
                                      const char *config_json,
                                      const char *name,
                                      uint64_t param,
                                      char **out_json);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* ORBITLAB_H */
