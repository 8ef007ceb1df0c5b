#ifndef ORLICZ_H
#define ORLICZ_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum OrliczStatus {
  ORLICZ_STATUS_OK = 0,
  ORLICZ_STATUS_NULL_POINTER = 1,
  ORLICZ_STATUS_DOMAIN = 2,
  ORLICZ_STATUS_RANGE = 3,
  ORLICZ_STATUS_DEGENERATE = 4,
  ORLICZ_STATUS_NOT_DELTA2 = 5,
  ORLICZ_STATUS_UNSUPPORTED = 6,
  ORLICZ_STATUS_CONFIG = 7,
  ORLICZ_STATUS_UNDER_RESOLVED = 8,
  ORLICZ_STATUS_INVALID_PROFILE = 9,
  ORLICZ_STATUS_SOLVER = 10,
  ORLICZ_STATUS_IO = 11,
  ORLICZ_STATUS_PANIC = 12,
} OrliczStatus;

// Sobolev conjugate handle.
typedef struct OrliczSobolev OrliczSobolev;

// Young function handle.
typedef struct OrliczYoung OrliczYoung;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the last failed call on this thread, or NULL. Valid until the
// next call on the same thread.
const char *orlicz_last_error(void);

// Library version as a static NUL-terminated string.
const char *orlicz_version(void);

// A(t) = t^p.
//
// # Safety
// `out` must be valid for writes.
enum OrliczStatus orlicz_young_power(double p, struct OrliczYoung **out);

// A(t) = t^p log(1+t)^q.
//
// # Safety
// `out` must be valid for writes.
enum OrliczStatus orlicz_young_power_log(double p, double q, struct OrliczYoung **out);

// Young function from `len` density samples (t_i, a(t_i)); `linear`
// interpolates a linearly, otherwise a is piecewise constant.
//
// # Safety
// `t` and `a` must point to `len` doubles, `out` valid for writes.
enum OrliczStatus orlicz_young_table(const double *t,
                                     const double *a,
                                     size_t len,
                                     bool linear,
                                     struct OrliczYoung **out);

// The complementary function Ã as a new handle.
//
// # Safety
// `y` must be a live handle, `out` valid for writes.
enum OrliczStatus orlicz_young_conjugate(const struct OrliczYoung *y, struct OrliczYoung **out);

// Releases a handle; NULL is ignored.
//
// # Safety
// `y` must come from this library and not be used afterwards.
void orlicz_young_free(struct OrliczYoung *y);

// A(t).
//
// # Safety
// `y` must be live, `out` valid for writes.
enum OrliczStatus orlicz_young_eval(const struct OrliczYoung *y, double x, double *out);

// a(t), the right derivative of A.
//
// # Safety
// `y` must be live, `out` valid for writes.
enum OrliczStatus orlicz_young_density(const struct OrliczYoung *y, double x, double *out);

// A⁻¹(s).
//
// # Safety
// `y` must be live, `out` valid for writes.
enum OrliczStatus orlicz_young_inverse(const struct OrliczYoung *y, double x, double *out);

// H(t) of the Sobolev conjugate.
//
// # Safety
// `s` must be live, `out` valid for writes.
enum OrliczStatus orlicz_sobolev_h(const struct OrliczSobolev *s, double x, double *out);

// H⁻¹(s).
//
// # Safety
// `s` must be live, `out` valid for writes.
enum OrliczStatus orlicz_sobolev_h_inverse(const struct OrliczSobolev *s, double x, double *out);

// A_n(s) = A(H⁻¹(s)).
//
// # Safety
// `s` must be live, `out` valid for writes.
enum OrliczStatus orlicz_sobolev_eval(const struct OrliczSobolev *s, double x, double *out);

// a_n(s).
//
// # Safety
// `s` must be live, `out` valid for writes.
enum OrliczStatus orlicz_sobolev_density(const struct OrliczSobolev *s, double x, double *out);

// Growth indices p⁻ ≤ t a(t)/A(t) ≤ p⁺.
//
// # Safety
// `y` must be live, `p_minus` and `p_plus` valid for writes.
enum OrliczStatus orlicz_young_indices(const struct OrliczYoung *y,
                                       double *p_minus,
                                       double *p_plus);

// Matuszewska index p_∞ of A.
//
// # Safety
// `y` must be live, `out` valid for writes.
enum OrliczStatus orlicz_young_matuszewska_index(const struct OrliczYoung *y, double *out);

// Luxemburg norm of the step function taking `values[i]` on a set of
// measure `weights[i]`.
//
// # Safety
// `values` and `weights` must point to `len` doubles, `out` valid for writes.
enum OrliczStatus orlicz_luxemburg_norm(const struct OrliczYoung *y,
                                        const double *values,
                                        const double *weights,
                                        size_t len,
                                        double *out);

// Sobolev conjugate A_n of `y` in dimension `n`; needs p⁺ < n.
//
// # Safety
// `y` must be live, `out` valid for writes.
enum OrliczStatus orlicz_sobolev_new(const struct OrliczYoung *y,
                                     size_t n,
                                     struct OrliczSobolev **out);

// Releases a handle; NULL is ignored.
//
// # Safety
// `s` must come from this library and not be used afterwards.
void orlicz_sobolev_free(struct OrliczSobolev *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* ORLICZ_H */
