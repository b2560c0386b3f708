#ifndef FUSION_RING_H
#define FUSION_RING_H

/* Generated by cbindgen from src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result code of every exported function.
 */
typedef enum FusionStatus {
  FUSION_STATUS_OK = 0,
  FUSION_STATUS_NULL_POINTER = 1,
  FUSION_STATUS_INVALID_UTF8 = 2,
  /**
   * Bad type string, level below 1, or rank above the default bound.
   */
  FUSION_STATUS_USAGE = 3,
  /**
   * Non-integral or singular data, or an engine disagreement.
   */
  FUSION_STATUS_INTEGRITY = 4,
  FUSION_STATUS_CERTIFICATE = 5,
  FUSION_STATUS_OUT_OF_RANGE = 6,
  FUSION_STATUS_BUFFER_TOO_SMALL = 7,
  FUSION_STATUS_PANIC = 8,
} FusionStatus;

typedef enum FusionMethod {
  FUSION_METHOD_VERLINDE = 0,
  FUSION_METHOD_IDEAL = 1,
  FUSION_METHOD_KAC_WALTON = 2,
} FusionMethod;

/**
 * Opaque fusion table.
 */
typedef struct FusionRingTable FusionRingTable;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Computes the fusion table of `type_name` (e.g. `"A3~2"`) at `level`.
 *
 * # Safety
 * `type_name` must be a NUL-terminated string and `out` a valid pointer.
 */
enum FusionStatus fusion_table_new(const char *type_name,
                                   int64_t level,
                                   enum FusionMethod method,
                                   struct FusionRingTable **out);

/**
 * Releases a table. Null is ignored.
 *
 * # Safety
 * `t` must come from [`fusion_table_new`] and not be used afterwards.
 */
void fusion_table_free(struct FusionRingTable *t);

/**
 * Number of level-ℓ weights `p`.
 *
 * # Safety
 * Pointers must be valid.
 */
enum FusionStatus fusion_table_size(const struct FusionRingTable *t, size_t *out);

/**
 * Length of each weight vector (the finite rank).
 *
 * # Safety
 * Pointers must be valid.
 */
enum FusionStatus fusion_table_rank(const struct FusionRingTable *t, size_t *out);

/**
 * Copies weight `index` (Dynkin labels, affine node omitted) into `buf`.
 *
 * # Safety
 * `buf` must hold `len` values.
 */
enum FusionStatus fusion_table_weight(const struct FusionRingTable *t,
                                      size_t index,
                                      int64_t *buf,
                                      size_t len);

/**
 * `N_{λμ}^ν` by weight index.
 *
 * # Safety
 * Pointers must be valid.
 */
enum FusionStatus fusion_table_coefficient(const struct FusionRingTable *t,
                                           size_t lambda,
                                           size_t mu,
                                           size_t nu,
                                           int64_t *out);

/**
 * Table as a JSON document; release with [`fusion_string_free`].
 *
 * # Safety
 * Pointers must be valid.
 */
enum FusionStatus fusion_table_to_json(const struct FusionRingTable *t, char **out);

/**
 * Releases a string from this library. Null is ignored.
 *
 * # Safety
 * `s` must come from this library and not be used afterwards.
 */
void fusion_string_free(char *s);

/**
 * Static description of a status code.
 */
const char *fusion_status_message(enum FusionStatus status);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* FUSION_RING_H */
