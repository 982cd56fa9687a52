#ifndef FSISHAPE_H
#define FSISHAPE_H

/* Generated with cbindgen:0.29.4 */

/* Warning: this file is generated from the fsishape-capi crate; do not edit by hand. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Status code returned by every fallible call.
typedef enum FsiStatus {
  // Success.
  FSI_STATUS_OK = 0,
  // A required pointer argument was null.
  FSI_STATUS_NULL_POINTER = 1,
  // An argument was out of range (amplitude, epsilon, quantity code...).
  FSI_STATUS_INVALID_ARGUMENT = 2,
  // The evaluation point lies outside the admissible window.
  FSI_STATUS_OUT_OF_DOMAIN = 3,
  // A numerical failure (degenerate transport Jacobian or similar).
  FSI_STATUS_NUMERICAL_FAILURE = 4,
  // An internal error; should not happen.
  FSI_STATUS_INTERNAL_ERROR = 5,
} FsiStatus;

// Opaque benchmark handle (problem parameters).
typedef struct FsiBenchmark FsiBenchmark;

// Opaque perturbation-sample handle.
typedef struct FsiSample FsiSample;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Library version as a static NUL-terminated string.
const char *fsishape_version(void);

// Human-readable description of a status code (static storage).
const char *fsishape_status_message(enum FsiStatus status);

// Creates a benchmark handle with the standard parameters.
//
// # Safety
// `out` must be a valid pointer to writable storage for one pointer.
enum FsiStatus fsishape_benchmark_new(struct FsiBenchmark **out);

// Releases a benchmark handle; a null pointer is a no-op.
//
// # Safety
// `handle` must have come from `fsishape_benchmark_new` and not have been
// freed already.
void fsishape_benchmark_free(struct FsiBenchmark *handle);

// Creates a perturbation sample; amplitudes must lie in `[-1, 1]` and
// `epsilon` in `[0, 0.25]`.
//
// # Safety
// `out` must be a valid pointer to writable storage for one pointer.
enum FsiStatus fsishape_sample_new(double epsilon, double a, double b, struct FsiSample **out);

// Releases a sample handle; a null pointer is a no-op.
//
// # Safety
// `handle` must have come from `fsishape_sample_new` and not have been
// freed already.
void fsishape_sample_free(struct FsiSample *handle);

// Unperturbed pressure at a point.
//
// # Safety
// `benchmark` and `out` must be valid pointers.
enum FsiStatus fsishape_eval_pressure(const struct FsiBenchmark *benchmark,
                                      double x,
                                      double y,
                                      double *out);

// Unperturbed displacement at a point; writes two components.
//
// # Safety
// `benchmark` must be valid and `out` must point to two writable doubles.
enum FsiStatus fsishape_eval_displacement(const struct FsiBenchmark *benchmark,
                                          double x,
                                          double y,
                                          double *out);

// Unperturbed stress at a point; writes four components in row-major
// order.
//
// # Safety
// `benchmark` must be valid and `out` must point to four writable doubles.
enum FsiStatus fsishape_eval_stress(const struct FsiBenchmark *benchmark,
                                    double x,
                                    double y,
                                    double *out);

// Runs the first-order residual verification; reports the worst residual
// and whether every identity passed.
//
// # Safety
// All pointer arguments must be valid; `pass` uses 1 for true, 0 for false.
enum FsiStatus fsishape_verify_first_order(const struct FsiBenchmark *benchmark,
                                           const struct FsiSample *sample,
                                           size_t interior_points,
                                           size_t boundary_nodes,
                                           double *max_residual,
                                           int *pass);

// Runs the second-order residual verification.
//
// # Safety
// All pointer arguments must be valid.
enum FsiStatus fsishape_verify_second_order(const struct FsiBenchmark *benchmark,
                                            const struct FsiSample *sample,
                                            size_t interior_points,
                                            size_t boundary_nodes,
                                            double *max_residual,
                                            int *pass);

// Quadrature mean and variance of an observable.
//
// Quantity codes: 0 pressure, 1 and 2 displacement components, 3..=6
// stress components in row-major order.
//
// # Safety
// All pointer arguments must be valid.
enum FsiStatus fsishape_moment_oracle(const struct FsiBenchmark *benchmark,
                                      double x,
                                      double y,
                                      double eps,
                                      int quantity,
                                      double *mean,
                                      double *variance);

// Monte Carlo mean and variance of an observable, with the standard error
// of the mean.
//
// # Safety
// All pointer arguments must be valid.
enum FsiStatus fsishape_moment_monte_carlo(const struct FsiBenchmark *benchmark,
                                           double x,
                                           double y,
                                           double eps,
                                           int quantity,
                                           size_t n_samples,
                                           uint64_t seed,
                                           double *mean,
                                           double *variance,
                                           double *stderr_mean);

// Fitted convergence slope of a moment-approximation error.
//
// Targets: 0 mean error, 1 variance error, 2 Taylor remainder.
//
// # Safety
// `eps_list` must point to `n_eps` doubles; all out-pointers must be valid.
enum FsiStatus fsishape_convergence_slope(const struct FsiBenchmark *benchmark,
                                          double x,
                                          double y,
                                          int quantity,
                                          int target,
                                          const double *eps_list,
                                          size_t n_eps,
                                          double *slope);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* FSISHAPE_H */
