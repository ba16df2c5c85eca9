#ifndef DISCLAB_H
#define DISCLAB_H

/* Generated by cbindgen from the disclab-ffi sources. Do not edit. */

#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>

/**
 * Status codes. Zero is success.
 */
typedef enum DisclabStatus {
  DISCLAB_STATUS_OK = 0,
  DISCLAB_STATUS_NULL_POINTER = 1,
  DISCLAB_STATUS_INVALID_ARGUMENT = 2,
  DISCLAB_STATUS_IO = 3,
  DISCLAB_STATUS_PARSE = 4,
  DISCLAB_STATUS_NUMERICAL = 5,
  DISCLAB_STATUS_TOO_LARGE = 6,
  /**
   * The input was checked and found mathematically wrong (for example a
   * certificate that fails verification).
   */
  DISCLAB_STATUS_REFUTED = 7,
  DISCLAB_STATUS_BUFFER_TOO_SMALL = 8,
  DISCLAB_STATUS_INTERNAL = 9,
} DisclabStatus;

/**
 * A dual certificate `(p, w, D)`.
 */
typedef struct DisclabCertificate DisclabCertificate;

/**
 * A dense real matrix.
 */
typedef struct DisclabMatrix DisclabMatrix;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static NUL-terminated string.
 */
const char *disclab_version(void);

/**
 * Message for the last failed call on this thread (empty after success).
 * Valid until the next call into this library on the same thread.
 */
const char *disclab_last_error_message(void);

/**
 * Creates a `rows × cols` matrix from row-major `data`.
 *
 * # Safety
 * `data` must point to `rows * cols` doubles; `out` must be writable.
 */
enum DisclabStatus disclab_matrix_new(size_t rows,
                                      size_t cols,
                                      const double *data,
                                      struct DisclabMatrix **out);

/**
 * Reads a matrix file.
 *
 * # Safety
 * `path` must be a NUL-terminated string; `out` must be writable.
 */
enum DisclabStatus disclab_matrix_read(const char *path, struct DisclabMatrix **out);

/**
 * Writes a matrix file atomically.
 *
 * # Safety
 * `matrix` must be a live handle; `path` a NUL-terminated string.
 */
enum DisclabStatus disclab_matrix_write(const struct DisclabMatrix *matrix, const char *path);

/**
 * # Safety
 * `matrix` must be null or a handle not yet freed.
 */
void disclab_matrix_free(struct DisclabMatrix *matrix);

/**
 * Row count, or 0 for a null handle.
 *
 * # Safety
 * `matrix` must be null or a live handle.
 */
size_t disclab_matrix_rows(const struct DisclabMatrix *matrix);

/**
 * Column count, or 0 for a null handle.
 *
 * # Safety
 * `matrix` must be null or a live handle.
 */
size_t disclab_matrix_cols(const struct DisclabMatrix *matrix);

/**
 * Copies the entries in row-major order into `buf` (`len ≥ rows·cols`).
 *
 * # Safety
 * `buf` must hold `len` doubles.
 */
enum DisclabStatus disclab_matrix_data(const struct DisclabMatrix *matrix, double *buf, size_t len);

/**
 * Gaussian matrix with unit-norm columns.
 *
 * # Safety
 * `out` must be writable.
 */
enum DisclabStatus disclab_gen_gaussian_unit(size_t rows,
                                             size_t cols,
                                             uint64_t seed,
                                             struct DisclabMatrix **out);

/**
 * Upper bound on `vecdisc(A)²`. `value` receives the maximum row value of
 * the returned coloring. When `coloring` is non-null it receives the
 * `n × n` coloring column by column (`coloring_len ≥ n²`).
 *
 * # Safety
 * Pointers must be null or valid for the stated lengths.
 */
enum DisclabStatus disclab_solve_vecdisc(const struct DisclabMatrix *matrix,
                                         size_t trials,
                                         size_t max_iters,
                                         uint64_t seed,
                                         double *value,
                                         double *coloring,
                                         size_t coloring_len);

/**
 * Exact `disc(A)` for `n ≤ limit`. `signs` (length `n`) receives an
 * optimal coloring when non-null.
 *
 * # Safety
 * `signs` must be null or hold `cols` bytes.
 */
enum DisclabStatus disclab_disc_brute(const struct DisclabMatrix *matrix,
                                      size_t limit,
                                      double *value,
                                      int8_t *signs);

/**
 * Builds a certificate from its parts. `p` must be a distribution.
 *
 * # Safety
 * `p` holds `p_len` doubles, `w` holds `w_len`; `out` must be writable.
 */
enum DisclabStatus disclab_cert_new(const double *p,
                                    size_t p_len,
                                    const double *w,
                                    size_t w_len,
                                    double d,
                                    struct DisclabCertificate **out);

/**
 * Heuristic certificate search; the result always verifies.
 *
 * # Safety
 * `matrix` must be a live handle; `out` must be writable.
 */
enum DisclabStatus disclab_cert_search(const struct DisclabMatrix *matrix,
                                       size_t iters,
                                       uint64_t seed,
                                       struct DisclabCertificate **out);

/**
 * Returns `DISCLAB_STATUS_OK` if the certificate is valid at `tol` and
 * `DISCLAB_STATUS_REFUTED` if it is not. `min_eigenvalue` receives
 * `λ_min(AᵀPA − W)` when non-null.
 *
 * # Safety
 * Handles must be live.
 */
enum DisclabStatus disclab_cert_verify(const struct DisclabMatrix *matrix,
                                       const struct DisclabCertificate *cert,
                                       double tol,
                                       double *min_eigenvalue);

/**
 * # Safety
 * `path` must be a NUL-terminated string; `out` must be writable.
 */
enum DisclabStatus disclab_cert_read(const char *path, struct DisclabCertificate **out);

/**
 * # Safety
 * `cert` must be a live handle; `path` a NUL-terminated string.
 */
enum DisclabStatus disclab_cert_write(const struct DisclabCertificate *cert, const char *path);

/**
 * # Safety
 * `cert` must be null or a handle not yet freed.
 */
void disclab_cert_free(struct DisclabCertificate *cert);

/**
 * The claimed bound `D`, or NaN for a null handle.
 *
 * # Safety
 * `cert` must be null or a live handle.
 */
double disclab_cert_bound(const struct DisclabCertificate *cert);

/**
 * `Σw`, or NaN for a null handle.
 *
 * # Safety
 * `cert` must be null or a live handle.
 */
double disclab_cert_weight_sum(const struct DisclabCertificate *cert);

/**
 * For a certificate with `Σw > 1` on a matrix with columns of norm at most
 * one, writes `z` (length `cols`) with `E_p[(Az)_i²] < Σ w_j z_j²` and both
 * sides of that inequality.
 *
 * # Safety
 * `z` must hold `z_len` doubles; `lhs` and `rhs` may be null.
 */
enum DisclabStatus disclab_extract_witness(const struct DisclabMatrix *matrix,
                                           const struct DisclabCertificate *cert,
                                           double *z,
                                           size_t z_len,
                                           double *lhs,
                                           double *rhs);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* DISCLAB_H */
