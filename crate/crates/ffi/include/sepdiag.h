#ifndef SEPDIAG_H
#define SEPDIAG_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum SepStatus {
  SEP_STATUS_OK = 0,
  SEP_STATUS_NULL_POINTER = 1,
  SEP_STATUS_INVALID_UTF8 = 2,
  SEP_STATUS_CONFIG_ERROR = 3,
  SEP_STATUS_INVALID_ARGUMENT = 4,
  SEP_STATUS_BUDGET_EXCEEDED = 5,
  SEP_STATUS_COMPUTATION_ERROR = 6,
  SEP_STATUS_BUFFER_TOO_SMALL = 7,
  SEP_STATUS_PANIC = 8,
} SepStatus;

// A sampled approximate solution set.
typedef struct SepCloud SepCloud;

// A validated problem together with its configuration.
typedef struct SepProblem SepProblem;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the last failed call on this thread, or null. The pointer
// stays valid until the next failing call on the same thread.
const char *sep_last_error_message(void);

// Parses and validates a JSON problem configuration.
//
// # Safety
// `json` must be a nul-terminated string and `out` a valid pointer.
enum SepStatus sep_problem_from_json(const char *json, struct SepProblem **out);

// Loads `builtin:example1`, `builtin:example2` or `builtin:example3`.
//
// # Safety
// `name` must be a nul-terminated string and `out` a valid pointer.
enum SepStatus sep_problem_builtin(const char *name, struct SepProblem **out);

// Releases a problem; null is ignored.
//
// # Safety
// `problem` must come from this library and not be used afterwards.
void sep_problem_free(struct SepProblem *problem);

// Dimensions of `C` and `Q`.
//
// # Safety
// All pointers must be valid.
enum SepStatus sep_problem_dims(const struct SepProblem *problem, size_t *n, size_t *m);

// Residual of `(x, y)`, the least `ε` for which it is an `ε`-solution on
// the problem's inner grid.
//
// # Safety
// `x` must hold `n` doubles, `y` must hold `m`, and `out` must be valid.
enum SepStatus sep_eps_residual(const struct SepProblem *problem,
                                const double *x,
                                size_t n,
                                const double *y,
                                size_t m,
                                double *out);

// Samples `S(epsilon)` on the problem's grids.
//
// # Safety
// `problem` and `out` must be valid.
enum SepStatus sep_approx_solution_set(const struct SepProblem *problem,
                                       double epsilon,
                                       struct SepCloud **out);

// Number of points; 0 for null.
//
// # Safety
// `cloud` must be null or valid.
size_t sep_cloud_len(const struct SepCloud *cloud);

// Coordinates per point (`n + m`); 0 for null.
//
// # Safety
// `cloud` must be null or valid.
size_t sep_cloud_dim(const struct SepCloud *cloud);

// The threshold the cloud was computed for, after flooring.
//
// # Safety
// `cloud` must be null or valid.
double sep_cloud_epsilon(const struct SepCloud *cloud);

// Copies the points row-major into `buffer`, which must hold
// `len * dim` doubles.
//
// # Safety
// `buffer` must be writable for `capacity` doubles.
enum SepStatus sep_cloud_points(const struct SepCloud *cloud, double *buffer, size_t capacity);

// Releases a cloud; null is ignored.
//
// # Safety
// `cloud` must come from this library and not be used afterwards.
void sep_cloud_free(struct SepCloud *cloud);

// Runs the full diagnosis and returns the report as JSON.
//
// # Safety
// `problem` and `out` must be valid.
enum SepStatus sep_diagnose_json(const struct SepProblem *problem, char **out);

// Runs one property checker (or `all`) on `f` and `g` and returns the
// reports as a JSON array.
//
// # Safety
// `problem`, `property` and `out` must be valid.
enum SepStatus sep_check_json(const struct SepProblem *problem, const char *property, char **out);

// Releases a string returned by this library; null is ignored.
//
// # Safety
// `s` must come from this library and not be used afterwards.
void sep_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SEPDIAG_H */
