#ifndef DEGENKERNEL_H
#define DEGENKERNEL_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Anchoring boundary for Wright–Fisher kernels.
typedef enum dk_side {
  DK_SIDE_LEFT = 0,
  DK_SIDE_RIGHT = 1,
} dk_side;

// Status codes.
typedef enum dk_status {
  DK_STATUS_OK = 0,
  DK_STATUS_NULL_POINTER = 1,
  DK_STATUS_DOMAIN = 2,
  DK_STATUS_PRECONDITION = 3,
  DK_STATUS_REGION = 4,
  DK_STATUS_CONFIG = 5,
  DK_STATUS_NUMERICAL = 6,
  DK_STATUS_SIMULATION = 7,
  DK_STATUS_IO = 8,
  DK_STATUS_PANIC = 9,
} dk_status;

// Budget variants for [`dk_kernel_eval`].
typedef enum dk_variant {
  DK_VARIANT_LOCAL = 0,
  DK_VARIANT_SCALE = 1,
  DK_VARIANT_ESCAPE = 2,
  DK_VARIANT_CONFINED = 3,
} dk_variant;

// A general problem with an optional inner level `G`.
typedef struct dk_kernel dk_kernel;

// One side of a Wright–Fisher problem.
typedef struct dk_wf_kernel dk_wf_kernel;

// An approximate kernel value and its certificate.
typedef struct dk_value {
  double value;
  double certificate;
  double relative_certificate;
} dk_value;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Copies the last error message of this thread into `buf` (NUL
// terminated, truncated to `len`). Returns the full message length, or 0
// when there is none.
//
// # Safety
// `buf` must be null or point to `len` writable bytes.
size_t dk_last_error(char *buf, size_t len);

// Library version as a static NUL-terminated string.
const char *dk_version(void);

// `q(z, w, t)` of the model equation `z∂z² + ν∂z`.
//
// # Safety
// `out` must be null or a valid pointer to an `f64`.
enum dk_status dk_eval_q(double nu, double z, double w, double t, double *out);

// Kernel for `a ≡ 1`, `b ≡ b0` on `(0, interval]`.
//
// # Safety
// `out` must be null or a valid pointer to a handle slot.
enum dk_status dk_kernel_new_constant_drift(double alpha,
                                            double b0,
                                            double interval,
                                            struct dk_kernel **out);

// Kernel from a problem file; the file's `localization` is applied.
//
// # Safety
// `path` must be null or a NUL-terminated string; `out` must be null or
// a valid pointer to a handle slot.
enum dk_status dk_kernel_from_config(const char *path, struct dk_kernel **out);

// Sets the inner level `G` used by the global variants.
//
// # Safety
// `h` must be null or a live handle from this library.
enum dk_status dk_kernel_set_localization(struct dk_kernel *h, double g);

// `p^{k-approx}(x, y, t)` with its certificate.
//
// # Safety
// `h` must be null or a live handle; `out` must be null or valid.
enum dk_status dk_kernel_eval(const struct dk_kernel *h,
                              size_t k,
                              double x,
                              double y,
                              double t,
                              enum dk_variant variant,
                              struct dk_value *out);

// Releases a kernel handle. Null is ignored.
//
// # Safety
// `h` must be null or a handle not yet freed.
void dk_kernel_free(struct dk_kernel *h);

// Wright–Fisher kernel anchored at `side` with level `G` (left) or `H`
// (right) and inner point `interval`.
//
// # Safety
// `out` must be null or a valid pointer to a handle slot.
enum dk_status dk_wf_new(double alpha,
                         double beta,
                         enum dk_side side,
                         double level,
                         double interval,
                         struct dk_wf_kernel **out);

// Two-sided `p^{k-approx}(x, y, t)` with its certificate.
//
// # Safety
// `h` must be null or a live handle; `out` must be null or valid.
enum dk_status dk_wf_eval(const struct dk_wf_kernel *h,
                          size_t k,
                          double x,
                          double y,
                          double t,
                          struct dk_value *out);

// Releases a Wright–Fisher handle. Null is ignored.
//
// # Safety
// `h` must be null or a handle not yet freed.
void dk_wf_free(struct dk_wf_kernel *h);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* DEGENKERNEL_H */
