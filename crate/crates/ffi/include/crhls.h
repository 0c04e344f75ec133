#ifndef CRHLS_H
#define CRHLS_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum CrhlsStatus {
  CRHLS_STATUS_OK = 0,
  CRHLS_STATUS_NULL_POINTER = 1,
  CRHLS_STATUS_DOMAIN = 2,
  CRHLS_STATUS_DIMENSION_MISMATCH = 3,
  CRHLS_STATUS_GRID = 4,
  CRHLS_STATUS_SOLVER = 5,
  CRHLS_STATUS_PARSE = 6,
  CRHLS_STATUS_IO = 7,
  CRHLS_STATUS_PANIC = 8,
} CrhlsStatus;

/**
 * Quadrature nodes and weights.
 */
typedef struct CrhlsGrid CrhlsGrid;

/**
 * Dense kernel matrix.
 */
typedef struct CrhlsKernel CrhlsKernel;

/**
 * Model parameters `(n, alpha)` and derived exponents.
 */
typedef struct CrhlsParams CrhlsParams;

/**
 * Outcome of a subcritical solve.
 */
typedef struct CrhlsResult CrhlsResult;

/**
 * Scalar fields of a [`CrhlsResult`].
 */
typedef struct CrhlsSolveSummary {
  double p;
  double d;
  double residual;
  size_t iterations;
  bool converged;
} CrhlsSolveSummary;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread; empty after a success.
 * The pointer stays valid until the next call into this library on the same thread.
 */
const char *crhls_last_error_message(void);

/**
 * # Safety
 * `out` must be valid for writing one pointer.
 */
enum CrhlsStatus crhls_params_new(size_t n, double alpha, struct CrhlsParams **out);

/**
 * # Safety
 * `params` must be null or a handle from [`crhls_params_new`] not yet freed.
 */
void crhls_params_free(struct CrhlsParams *params);

/**
 * Writes `p_alpha`, `q_alpha` and `b_n`.
 *
 * # Safety
 * `params` must be a live handle; each output must be valid for writing.
 */
enum CrhlsStatus crhls_params_exponents(const struct CrhlsParams *params,
                                        double *p_alpha,
                                        double *q_alpha,
                                        double *b_n);

/**
 * # Safety
 * `params` must be a live handle and `out` valid for writing.
 */
enum CrhlsStatus crhls_sharp_constant(const struct CrhlsParams *params, double *out);

/**
 * Hopf product rule on `S^3`.
 *
 * # Safety
 * `out` must be valid for writing one pointer.
 */
enum CrhlsStatus crhls_grid_sphere(size_t theta, size_t phi1, size_t phi2, struct CrhlsGrid **out);

/**
 * Abstract grid with the given positive weights.
 *
 * # Safety
 * `weights` must point to `len` readable doubles; `out` must be valid for writing.
 */
enum CrhlsStatus crhls_grid_discrete(const double *weights, size_t len, struct CrhlsGrid **out);

/**
 * # Safety
 * `grid` must be a live handle and `out` valid for writing.
 */
enum CrhlsStatus crhls_grid_len(const struct CrhlsGrid *grid, size_t *out);

/**
 * Copies the weights into `buf`, which must hold exactly the grid length.
 *
 * # Safety
 * `grid` must be a live handle; `buf` must be valid for `len` writes.
 */
enum CrhlsStatus crhls_grid_weights(const struct CrhlsGrid *grid, double *buf, size_t len);

/**
 * # Safety
 * `grid` must be null or a live handle.
 */
void crhls_grid_free(struct CrhlsGrid *grid);

/**
 * Kernel from `dim * dim` row-major entries.
 *
 * # Safety
 * `entries` must point to `dim * dim` readable doubles; `out` must be valid for writing.
 */
enum CrhlsStatus crhls_kernel_from_entries(size_t dim,
                                           const double *entries,
                                           struct CrhlsKernel **out);

/**
 * Pure singular kernel `rho^{alpha - Q}` on every node pair of `grid`.
 *
 * # Safety
 * `grid` and `params` must be live handles; `out` must be valid for writing.
 */
enum CrhlsStatus crhls_kernel_pure_singular(const struct CrhlsGrid *grid,
                                            const struct CrhlsParams *params,
                                            struct CrhlsKernel **out);

/**
 * Orbit-reduced pure singular kernel on `grid`; also returns the reduced grid.
 *
 * # Safety
 * `grid` and `params` must be live handles; both outputs must be valid for writing.
 */
enum CrhlsStatus crhls_kernel_orbit(const struct CrhlsGrid *grid,
                                    const struct CrhlsParams *params,
                                    struct CrhlsGrid **out_grid,
                                    struct CrhlsKernel **out_kernel);

/**
 * Reads a kernel CSV file.
 *
 * # Safety
 * `path` must be a NUL-terminated UTF-8 string; `out` must be valid for writing.
 */
enum CrhlsStatus crhls_kernel_read_csv(const char *path, struct CrhlsKernel **out);

/**
 * # Safety
 * `kernel` must be a live handle and `out` valid for writing.
 */
enum CrhlsStatus crhls_kernel_dim(const struct CrhlsKernel *kernel, size_t *out);

/**
 * # Safety
 * `kernel` must be null or a live handle.
 */
void crhls_kernel_free(struct CrhlsKernel *kernel);

/**
 * `B(f, f) / ||f||_p^2`.
 *
 * # Safety
 * Handles must be live; `f` must point to `len` readable doubles; `out` must be valid for writing.
 */
enum CrhlsStatus crhls_rayleigh_quotient(const struct CrhlsKernel *kernel,
                                         const struct CrhlsGrid *grid,
                                         const double *f,
                                         size_t len,
                                         double p,
                                         double *out);

/**
 * Subcritical maximizer from the uniform start. Non-convergence is reported
 * in the result summary, not as an error.
 *
 * # Safety
 * Handles must be live; `out` must be valid for writing.
 */
enum CrhlsStatus crhls_solve_subcritical(const struct CrhlsKernel *kernel,
                                         const struct CrhlsGrid *grid,
                                         double p,
                                         double tol,
                                         size_t max_iter,
                                         struct CrhlsResult **out);

/**
 * # Safety
 * `result` must be a live handle and `out` valid for writing.
 */
enum CrhlsStatus crhls_result_summary(const struct CrhlsResult *result,
                                      struct CrhlsSolveSummary *out);

/**
 * Copies the maximizer into `buf`, which must hold exactly the grid length.
 *
 * # Safety
 * `result` must be a live handle; `buf` must be valid for `len` writes.
 */
enum CrhlsStatus crhls_result_values(const struct CrhlsResult *result, double *buf, size_t len);

/**
 * # Safety
 * `result` must be null or a live handle.
 */
void crhls_result_free(struct CrhlsResult *result);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* CRHLS_H */
