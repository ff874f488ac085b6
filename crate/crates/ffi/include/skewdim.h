#ifndef SKEWDIM_H
#define SKEWDIM_H

/* Mirrors crates/ffi/src/lib.rs in cbindgen layout; regenerate with crates/ffi/cbindgen.toml. */

#include <stdbool.h>
#include <stdint.h>

/*
 Status codes. The error classes match the CLI exit codes.
 */
typedef enum SkewdimStatus {
  SKEWDIM_STATUS_OK = 0,
  /*
   A required pointer was null.
   */
  SKEWDIM_STATUS_NULL_ARGUMENT = 1,
  /*
   Invalid parameters or a degenerate configuration.
   */
  SKEWDIM_STATUS_CONFIG = 2,
  /*
   A numerical method did not converge.
   */
  SKEWDIM_STATUS_NUMERIC = 3,
  /*
   A size or work budget was exceeded.
   */
  SKEWDIM_STATUS_RESOURCE = 4,
  /*
   The library panicked; this is a bug.
   */
  SKEWDIM_STATUS_INTERNAL = 5,
} SkewdimStatus;

/*
 A traced curve.
 */
typedef struct SkewdimCurve SkewdimCurve;

/*
 Model parameters plus solver settings.
 */
typedef struct SkewdimModel SkewdimModel;

typedef struct SkewdimGamma {
  double gamma_c;
  double gamma_min_est;
  double gamma_max_est;
  uint64_t witness_min_len;
  uint64_t witness_max_len;
} SkewdimGamma;

typedef struct SkewdimPressure {
  double value;
  double dq_dq;
  double dq_ddelta;
  /*
   Window length, or nodes per panel for collocation.
   */
  uint64_t resolution;
  uint64_t iterations;
  double est_error;
} SkewdimPressure;

typedef struct SkewdimPoint {
  double t;
  double d;
  double q;
  double residual_q;
  double residual_dqdq;
  uint64_t window;
  double mu_u;
  double slope;
  bool converged;
} SkewdimPoint;

typedef struct SkewdimZeroSet {
  uint64_t zero;
  uint64_t positive;
  uint64_t undetermined;
  double fraction_zero;
} SkewdimZeroSet;

/*
 Message of the last failed call on this thread, or null. Valid until the
 next call on the same thread.
 */
const char *skewdim_last_error(void);

/*
 Library version as a static nul-terminated string.
 */
const char *skewdim_version(void);

/*
 Create a model with `g(v) = c + cos(2 pi v)` and default solver settings.

 # Safety
 `model_out` must be null or valid for writes.
 */
SkewdimStatus skewdim_model_new(double a, double c, SkewdimModel **model_out);

/*
 Release a model. Null is ignored.

 # Safety
 `model` must come from [`skewdim_model_new`] and not be used afterwards.
 */
void skewdim_model_free(SkewdimModel *model);

/*
 Set the Newton and resolution-agreement tolerances, and the backend
 (`0` collocation, `1` transfer windows).

 # Safety
 `model` must be null or a live handle.
 */
SkewdimStatus skewdim_model_configure(SkewdimModel *model,
                                      double newton_tol,
                                      double win_tol,
                                      uint32_t backend);

/*
 `gamma_c` and the periodic-orbit extremes up to `max_period`.

 # Safety
 `model` must be null or a live handle; `result` null or valid for writes.
 */
SkewdimStatus skewdim_gamma(const SkewdimModel *model, uint64_t max_period, SkewdimGamma *result);

/*
 `Q(delta, q, t)` from the transfer matrix on `m`-windows.

 # Safety
 `model` must be null or a live handle; `result` null or valid for writes.
 */
SkewdimStatus skewdim_pressure_window(const SkewdimModel *model,
                                      uint64_t m,
                                      double q,
                                      double delta,
                                      double t,
                                      SkewdimPressure *result);

/*
 `Q(delta, q, t)` from collocation, refined until successive resolutions
 agree to the model's `win_tol`.

 # Safety
 `model` must be null or a live handle; `result` null or valid for writes.
 */
SkewdimStatus skewdim_pressure(const SkewdimModel *model,
                               double q,
                               double delta,
                               double t,
                               SkewdimPressure *result);

/*
 Solve for `(D, q)` at `t` from the seed `(init_d, init_q)`.

 # Safety
 `model` must be null or a live handle; `result` null or valid for writes.
 */
SkewdimStatus skewdim_solve(const SkewdimModel *model,
                            double t,
                            double init_d,
                            double init_q,
                            SkewdimPoint *result);

/*
 Trace `D(t)` over `len` grid values by continuation from `gamma_c`.
 Points that fail are kept with `converged = false`.

 # Safety
 `grid` must point to `len` readable doubles; `curve_out` must be null or
 valid for writes.
 */
SkewdimStatus skewdim_trace(const SkewdimModel *model,
                            const double *grid,
                            uint64_t len,
                            SkewdimCurve **curve_out);

/*
 Number of points in a curve; 0 for null.

 # Safety
 `curve` must be null or a live handle.
 */
uint64_t skewdim_curve_len(const SkewdimCurve *curve);

/*
 Copy point `index` of a curve.

 # Safety
 `curve` must be null or a live handle; `result` null or valid for writes.
 */
SkewdimStatus skewdim_curve_point(const SkewdimCurve *curve, uint64_t index, SkewdimPoint *result);

/*
 Release a curve. Null is ignored.

 # Safety
 `curve` must come from [`skewdim_trace`] and not be used afterwards.
 */
void skewdim_curve_free(SkewdimCurve *curve);

/*
 Classify `samples` Lebesgue-random points at `t` with `n` pullback steps.

 # Safety
 `model` must be null or a live handle; `result` null or valid for writes.
 */
SkewdimStatus skewdim_zeroset(const SkewdimModel *model,
                              double t,
                              uint64_t samples,
                              uint64_t n,
                              uint64_t seed,
                              SkewdimZeroSet *result);

#endif /* SKEWDIM_H */
