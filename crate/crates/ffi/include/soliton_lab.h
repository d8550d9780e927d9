#ifndef SOLITON_LAB_H
#define SOLITON_LAB_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum SlStatus {
  SL_STATUS_OK = 0,
  SL_STATUS_NULL_POINTER = 1,
  SL_STATUS_PARAMETER = 2,
  SL_STATUS_DOMAIN = 3,
  SL_STATUS_NUMERIC = 4,
  SL_STATUS_PANIC = 5,
} SlStatus;

typedef enum SlConvention {
  SL_CONVENTION_CORRECTED = 0,
  SL_CONVENTION_AS_PRINTED = 1,
} SlConvention;

typedef enum SlVerdict {
  SL_VERDICT_EXCEEDS_KOBAYASHI = 0,
  SL_VERDICT_CONSTANT_CURVATURE_MAX = 1,
  SL_VERDICT_EXCEEDS_SOLITON_MAX = 2,
  SL_VERDICT_SOLITON_MAX = 3,
  SL_VERDICT_FORBIDDEN_GAP = 4,
  SL_VERDICT_GAP_RULE_INAPPLICABLE = 5,
  SL_VERDICT_ALLOWED = 6,
} SlVerdict;

typedef enum SlTermination {
  SL_TERMINATION_REACHED_END = 0,
  SL_TERMINATION_BLOW_UP_DETECTED = 1,
  SL_TERMINATION_STEP_UNDERFLOW = 2,
  SL_TERMINATION_WARP_COLLAPSE = 3,
  SL_TERMINATION_STEP_LIMIT = 4,
} SlTermination;

typedef enum SlCaseTag {
  SL_CASE_TAG_C_ZERO = 0,
  SL_CASE_TAG_C_POSITIVE = 1,
  SL_CASE_TAG_C_NEGATIVE = 2,
} SlCaseTag;

// Opaque flat-system trajectory.
typedef struct SlFlatTrajectory SlFlatTrajectory;

// Opaque diagonal profile.
typedef struct SlProfile SlProfile;

// Summary of a closed-form steady solution. Unbounded ends are `±INFINITY`,
// absent poles are `NAN`.
typedef struct SlClosedForm {
  int32_t case_tag;
  double riccati_constant;
  double domain_start;
  double domain_end;
  double blowup_forward;
  double blowup_backward;
} SlClosedForm;

typedef struct SlDimBounds {
  uint64_t kobayashi;
  uint64_t soliton_max;
  uint64_t gap_ceiling;
} SlDimBounds;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Copies the last error message of this thread into `buf` (NUL-terminated,
// truncated to `len`). Returns the full message length excluding the NUL;
// 0 when there is no message.
//
// # Safety
// `buf` must be null or writable for `len` bytes.
size_t sl_last_error_message(char *buf, size_t len);

// Library version as a static NUL-terminated string.
const char *sl_version(void);

// Scalar curvature and `Ric(N,N)` of a diagonal metric at one point, from
// `m` warping factors and their first and second derivatives.
//
// # Safety
// `h`, `h_prime`, `h_double_prime` must point to `m` doubles; outputs must be
// writable.
enum SlStatus sl_curvature_diagonal(size_t m,
                                    const double *h,
                                    const double *h_prime,
                                    const double *h_double_prime,
                                    double *out_scalar,
                                    double *out_ric_normal);

// Integrates the flat system from `(t0, u0, u[0..n-1])` towards `t_end`.
//
// # Safety
// `u` must point to `n - 1` doubles and `out` must be writable.
enum SlStatus sl_flat_integrate(size_t n,
                                double lambda,
                                enum SlConvention convention,
                                double t0,
                                double u0,
                                const double *u,
                                double t_end,
                                double rtol,
                                double atol,
                                double blowup_threshold,
                                struct SlFlatTrajectory **out);

// Number of stored samples; 0 for a null handle.
//
// # Safety
// `traj` must be null or a live handle from [`sl_flat_integrate`].
size_t sl_flat_trajectory_len(const struct SlFlatTrajectory *traj);

// Sample `index`: time, `u0`, and `n - 1` fiber components into `out_u`.
//
// # Safety
// `traj` must be a live handle; outputs must be writable (`out_u` for `n - 1` doubles).
enum SlStatus sl_flat_trajectory_state(const struct SlFlatTrajectory *traj,
                                       size_t index,
                                       double *out_t,
                                       double *out_u0,
                                       double *out_u);

// Termination reason, or -1 for a null handle.
//
// # Safety
// `traj` must be null or a live handle.
int32_t sl_flat_trajectory_termination(const struct SlFlatTrajectory *traj);

// Estimated blow-up time, or `NAN` when none was detected or `traj` is null.
//
// # Safety
// `traj` must be null or a live handle.
double sl_flat_trajectory_blowup(const struct SlFlatTrajectory *traj);

// # Safety
// `traj` must be null or a handle not yet freed.
void sl_flat_trajectory_free(struct SlFlatTrajectory *traj);

// Reconstructs the metric and potential along a trajectory.
//
// # Safety
// `traj` must be a live handle, `h0` must point to `n - 1` doubles, `out` writable.
enum SlStatus sl_flat_reconstruct(const struct SlFlatTrajectory *traj,
                                  const double *h0,
                                  double f0,
                                  struct SlProfile **out);

// Hamilton drift `max |Q − Q(t₀)|` along a profile.
//
// # Safety
// `profile` must be a live handle and `out` writable.
enum SlStatus sl_profile_hamilton_drift(const struct SlProfile *profile, double *out);

// Elliptic identity residual along a profile (at least 5 samples).
//
// # Safety
// `profile` must be a live handle and `out` writable.
enum SlStatus sl_profile_elliptic_residual(const struct SlProfile *profile, double *out);

// # Safety
// `profile` must be null or a handle not yet freed.
void sl_profile_free(struct SlProfile *profile);

// Closed-form steady solution through `(t0, u0, u[0..m])`.
//
// # Safety
// `u` must point to `m` doubles and `out` must be writable.
enum SlStatus sl_closed_form(size_t m,
                             double u0,
                             const double *u,
                             double t0,
                             struct SlClosedForm *out);

// Classifies an isometry-algebra dimension `d` on an `n`-manifold.
//
// # Safety
// `out_verdict` must be writable; `out_bounds` may be null.
enum SlStatus sl_dims_classify(uint64_t n,
                               uint64_t d,
                               enum SlVerdict *out_verdict,
                               struct SlDimBounds *out_bounds);

// The three dimension bounds for `n >= 3`.
//
// # Safety
// `out` must be writable.
enum SlStatus sl_dims_bounds(uint64_t n, struct SlDimBounds *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SOLITON_LAB_H */
