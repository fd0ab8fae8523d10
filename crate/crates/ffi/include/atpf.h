/* C bindings for the atpf library: antisymmetric tensors, CP-rank
 * bounds and estimation. Opaque handles own their memory; every handle
 * returned through an out-pointer must be released with the matching
 * *_free function. All functions returning AtpfStatus set a thread-local
 * error message readable via atpf_last_error_message. */

#ifndef ATPF_H
#define ATPF_H

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status codes returned by every binding.
 */
typedef enum AtpfStatus {
  ATPF_STATUS_OK = 0,
  ATPF_STATUS_NULL_POINTER = 1,
  ATPF_STATUS_INVALID_ARGUMENT = 2,
  ATPF_STATUS_NUMERIC = 3,
  ATPF_STATUS_IO = 4,
  ATPF_STATUS_UTF8 = 5,
  ATPF_STATUS_OVERFLOW = 6,
} AtpfStatus;

/**
 * Opaque rank-search report.
 */
typedef struct AtpfRankReport AtpfRankReport;

/**
 * Opaque dense complex tensor.
 */
typedef struct AtpfTensor AtpfTensor;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Copies the last error message (thread-local) into `buf` as a
 * NUL-terminated string, truncating to `cap`. Returns the full message
 * length in bytes (excluding the terminator).
 *
 * # Safety
 * `buf` must point to `cap` writable bytes, or be null (query mode).
 */
uintptr_t atpf_last_error_message(char *buf, uintptr_t cap);

/**
 * Library version as a static NUL-terminated string.
 */
const char *atpf_version(void);

/**
 * Determinant-tensor CP-rank bounds:
 * `binom(N, floor(N/2)) <= rank <= floor(N! (5/6)^floor(N/3))`, exact.
 *
 * # Safety
 * `lower` and `upper` must be valid writable pointers.
 */
enum AtpfStatus atpf_det_rank_bounds(uint32_t n, uint64_t *lower, uint64_t *upper);

/**
 * Rank bounds for nonzero antisymmetric tensors in the `(N, K)` space.
 * Fails with `OVERFLOW` when the exact value exceeds `u64`.
 *
 * # Safety
 * `lower` and `upper` must be valid writable pointers.
 */
enum AtpfStatus atpf_antisym_rank_bounds(uint32_t n, uint32_t k, uint64_t *lower, uint64_t *upper);

/**
 * The exact `binom(N, floor(N/2))` alongside the `2^N / sqrt(N)` estimate.
 *
 * # Safety
 * `exact` and `estimate` must be valid writable pointers.
 */
enum AtpfStatus atpf_asymptotic_lower_bound(uint32_t n, uint64_t *exact, double *estimate);

/**
 * Allocates the order-`N` determinant tensor.
 *
 * # Safety
 * `out` must be a valid writable pointer.
 */
enum AtpfStatus atpf_determinant_tensor(uint32_t n, struct AtpfTensor **out);

/**
 * Allocates the basis tensor `E_k` for a strictly increasing 1-based
 * multi-index of length `len` in ambient dimension `dim`.
 *
 * # Safety
 * `indices` must point to `len` readable `u32`s; `out` must be writable.
 */
enum AtpfStatus atpf_basis_tensor(const uint32_t *indices,
                                  uintptr_t len,
                                  uint32_t dim,
                                  struct AtpfTensor **out);

/**
 * Reads a tensor from the plain-text format.
 *
 * # Safety
 * `path` must be a valid NUL-terminated string; `out` must be writable.
 */
enum AtpfStatus atpf_tensor_read(const char *path, struct AtpfTensor **out);

/**
 * Writes a tensor in the plain-text format.
 *
 * # Safety
 * `tensor` must be a live handle; `path` a valid NUL-terminated string.
 */
enum AtpfStatus atpf_tensor_write(const struct AtpfTensor *tensor, const char *path);

/**
 * Tensor order (number of modes).
 *
 * # Safety
 * `tensor` must be a live handle; `order` writable.
 */
enum AtpfStatus atpf_tensor_order(const struct AtpfTensor *tensor, uint32_t *order);

/**
 * Copies the mode dimensions into `dims` (must hold at least `order`
 * entries).
 *
 * # Safety
 * `tensor` must be a live handle; `dims` must point to `cap` writable u32s.
 */
enum AtpfStatus atpf_tensor_dims(const struct AtpfTensor *tensor, uint32_t *dims, uintptr_t cap);

/**
 * Entry at a 1-based multi-index of length `len`.
 *
 * # Safety
 * `tensor` live; `index` points to `len` readable u32s; `re`/`im` writable.
 */
enum AtpfStatus atpf_tensor_get(const struct AtpfTensor *tensor,
                                const uint32_t *index,
                                uintptr_t len,
                                double *re,
                                double *im);

/**
 * Allocates the antisymmetrized tensor (signed average over all index
 * permutations).
 *
 * # Safety
 * `tensor` must be a live handle; `out` writable.
 */
enum AtpfStatus atpf_tensor_antisymmetrize(const struct AtpfTensor *tensor,
                                           struct AtpfTensor **out);

/**
 * Releases a tensor handle. Null is a no-op.
 *
 * # Safety
 * `tensor` must have been returned by this library and not freed before.
 */
void atpf_tensor_free(struct AtpfTensor *tensor);

/**
 * Heuristic rank search: best-of-restarts ALS fits from the analytic lower
 * bound (or 1) up to `p_max`. Pass 0 for `restarts`/`max_sweeps` to use the
 * defaults (16 restarts, 2000 sweeps); `rel_tol <= 0` selects 1e-8.
 *
 * # Safety
 * `tensor` must be a live handle; `out` writable.
 */
enum AtpfStatus atpf_rank_search(const struct AtpfTensor *tensor,
                                 uint32_t p_max,
                                 double rel_tol,
                                 uint32_t restarts,
                                 uint64_t seed,
                                 uint32_t max_sweeps,
                                 struct AtpfRankReport **out);

/**
 * Estimated rank, or -1 when no tried rank met the tolerance. The estimate
 * is heuristic: an ALS failure is never a rank certificate.
 *
 * # Safety
 * `report` must be a live handle; `estimated` writable.
 */
enum AtpfStatus atpf_rank_report_estimated(const struct AtpfRankReport *report, int64_t *estimated);

/**
 * Analytic bounds carried by the report.
 *
 * # Safety
 * `report` must be a live handle; `lower`/`upper` writable.
 */
enum AtpfStatus atpf_rank_report_bounds(const struct AtpfRankReport *report,
                                        uint64_t *lower,
                                        uint64_t *upper);

/**
 * Best residual recorded for a rank tried by the search.
 *
 * # Safety
 * `report` must be a live handle; `residual` writable.
 */
enum AtpfStatus atpf_rank_report_residual(const struct AtpfRankReport *report,
                                          uint32_t rank,
                                          double *residual);

/**
 * Copies the report's CSV block into `buf` (NUL-terminated, truncating to
 * `cap`). Returns the full CSV length in bytes.
 *
 * # Safety
 * `report` must be a live handle; `buf` must point to `cap` writable bytes
 * or be null (query mode).
 */
uintptr_t atpf_rank_report_csv(const struct AtpfRankReport *report, char *buf, uintptr_t cap);

/**
 * Releases a rank report handle. Null is a no-op.
 *
 * # Safety
 * `report` must have been returned by this library and not freed before.
 */
void atpf_rank_report_free(struct AtpfRankReport *report);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* ATPF_H */
