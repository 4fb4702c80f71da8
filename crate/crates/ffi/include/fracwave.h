#ifndef FRACWAVE_H
#define FRACWAVE_H

/* Generated with cbindgen:0.27.0 */

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result codes.
 */
typedef enum FwStatus {
  FW_STATUS_OK = 0,
  FW_STATUS_NULL_POINTER = 1,
  FW_STATUS_INVALID_ARGUMENT = 2,
  FW_STATUS_CONFIG = 3,
  FW_STATUS_PRECONDITION = 4,
  FW_STATUS_BUFFER_TOO_SMALL = 5,
  FW_STATUS_PANIC = 6,
} FwStatus;

/**
 * A validated problem.
 */
typedef struct FwProblem FwProblem;

/**
 * A solved problem: modal coefficients on the time grid and norm report.
 */
typedef struct FwSolution FwSolution;

/**
 * Norms of the Galerkin solution.
 */
typedef struct FwNorms {
  double h1_sup;
  double dt_l2;
  double h2_sup;
  double caputo_sup;
  double h_alpha_hminus1;
  double q_norm;
} FwNorms;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Copies the last error message of this thread into `buf` (NUL-terminated,
 * truncated to `len`). Returns the full message length plus one, or 0 when
 * the last call succeeded.
 *
 * # Safety
 * `buf` must be null or valid for `len` bytes.
 */
size_t fw_last_error(char *buf, size_t len);

/**
 * Library version as a static NUL-terminated string.
 */
const char *fw_version(void);

/**
 * Parses a TOML problem description and assembles its Galerkin system.
 *
 * # Safety
 * `source` must be a NUL-terminated UTF-8 string and `out` a valid pointer.
 */
enum FwStatus fw_problem_from_toml(const char *source, struct FwProblem **out);

/**
 * Releases a problem; null is ignored.
 *
 * # Safety
 * `problem` must come from [`fw_problem_from_toml`] and not be used afterwards.
 */
void fw_problem_free(struct FwProblem *problem);

/**
 * Solves `problem`.
 *
 * # Safety
 * `problem` must be a live handle and `out` a valid pointer.
 */
enum FwStatus fw_solve(const struct FwProblem *problem, struct FwSolution **out);

/**
 * Releases a solution; null is ignored.
 *
 * # Safety
 * `solution` must come from [`fw_solve`] and not be used afterwards.
 */
void fw_solution_free(struct FwSolution *solution);

/**
 * Number of time nodes (`n_steps + 1`) and modes.
 *
 * # Safety
 * All pointers must be valid.
 */
enum FwStatus fw_solution_dims(const struct FwSolution *solution, size_t *n_times, size_t *modes);

/**
 * Copies the time nodes into `out[0..n_times]`.
 *
 * # Safety
 * `out` must be valid for `len` doubles.
 */
enum FwStatus fw_solution_times(const struct FwSolution *solution, double *out, size_t len);

/**
 * Copies the modal coefficients, row-major by time node, into
 * `out[0..n_times * modes]`.
 *
 * # Safety
 * `out` must be valid for `len` doubles.
 */
enum FwStatus fw_solution_coefficients(const struct FwSolution *solution, double *out, size_t len);

/**
 * Evaluates `u_N(x, t_node)`.
 *
 * # Safety
 * `solution` must be a live handle and `out` a valid pointer.
 */
enum FwStatus fw_solution_eval(const struct FwSolution *solution,
                               size_t node,
                               double x,
                               double *out);

/**
 * Norm report of the solution.
 *
 * # Safety
 * `solution` must be a live handle and `out` a valid pointer.
 */
enum FwStatus fw_solution_norms(const struct FwSolution *solution, struct FwNorms *out);

/**
 * Two-parameter Mittag-Leffler function `E_{alpha,beta}(z)`.
 *
 * # Safety
 * `out` must be a valid pointer.
 */
enum FwStatus fw_mittag_leffler(double alpha, double beta, double z, double *out);

/**
 * Riemann-Liouville integral `J^gamma` of samples `values[0..len]` on the
 * uniform grid of `[0, t_max]`, written to `out[0..len]`.
 *
 * # Safety
 * `values` and `out` must be valid for `len` doubles.
 */
enum FwStatus fw_frac_integral(double gamma,
                               double t_max,
                               const double *values,
                               size_t len,
                               double *out);

/**
 * Caputo derivative `∂^gamma` of samples on the uniform grid of `[0, t_max]`.
 *
 * # Safety
 * `values` and `out` must be valid for `len` doubles.
 */
enum FwStatus fw_caputo_derivative(double gamma,
                                   double t_max,
                                   const double *values,
                                   size_t len,
                                   double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* FRACWAVE_H */
