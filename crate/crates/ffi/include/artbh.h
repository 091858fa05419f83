#ifndef ARTBH_H
#define ARTBH_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result codes. `NoHorizon` is an expected outcome, not a failure.
 */
typedef enum ArtbhStatus {
  ARTBH_STATUS_OK = 0,
  /**
   * a required pointer was null
   */
  ARTBH_STATUS_NULL_ARGUMENT = 1,
  /**
   * the input violates a precondition (bad geometry, bad parameter)
   */
  ARTBH_STATUS_PRECONDITION = 2,
  /**
   * numerical or I/O failure inside the library
   */
  ARTBH_STATUS_INTERNAL = 3,
  /**
   * a string argument was not valid UTF-8
   */
  ARTBH_STATUS_INVALID_UTF8 = 4,
  /**
   * output buffer too small; the message states the required length
   */
  ARTBH_STATUS_BUFFER_TOO_SMALL = 5,
  /**
   * the finder established that there is no horizon
   */
  ARTBH_STATUS_NO_HORIZON = 6,
  /**
   * the library panicked (a bug)
   */
  ARTBH_STATUS_PANIC = 7,
} ArtbhStatus;

/**
 * Opaque closed-curve handle.
 */
typedef struct ArtbhCurve ArtbhCurve;

/**
 * Opaque horizon handle.
 */
typedef struct ArtbhHorizon ArtbhHorizon;

/**
 * Opaque metric handle.
 */
typedef struct ArtbhMetric ArtbhMetric;

/**
 * Message of the last failure on this thread, or null. Valid until the next
 * call into the library from the same thread.
 */
const char *artbh_last_error(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *artbh_version(void);

/**
 * Build the `[metric]` of a TOML run configuration.
 *
 * # Safety
 * `toml` must be a NUL-terminated string and `out` a valid pointer.
 */
enum ArtbhStatus artbh_metric_from_toml(const char *toml, struct ArtbhMetric **out);

/**
 * Draining bathtub `v = (A x + B y, A y − B x)/r²` with
 * `B(θ) = b0 + b1 cos θ + c1 sin θ`.
 *
 * # Safety
 * `out` must be a valid pointer.
 */
enum ArtbhStatus artbh_metric_bathtub(double a,
                                      double b0,
                                      double b1,
                                      double c1,
                                      struct ArtbhMetric **out);

/**
 * Kerr in `(ρ, z, φ)` coordinates.
 *
 * # Safety
 * `out` must be a valid pointer.
 */
enum ArtbhStatus artbh_metric_kerr_cyl(double m, double a, struct ArtbhMetric **out);

/**
 * # Safety
 * `metric` must come from an `artbh_metric_*` constructor (or be null).
 */
void artbh_metric_free(struct ArtbhMetric *metric);

/**
 * Spatial dimension `n`, or 0 for a null handle.
 *
 * # Safety
 * `metric` must be a live handle or null.
 */
size_t artbh_metric_dim(const struct ArtbhMetric *metric);

/**
 * Contravariant coefficients `g^{jk}(x)`, `j, k = 0..=n`, row-major into
 * `out` (`(n+1)²` doubles).
 *
 * # Safety
 * `x` must hold `n` doubles and `out` `out_len` doubles.
 */
enum ArtbhStatus artbh_metric_g_up(const struct ArtbhMetric *metric,
                                   const double *x,
                                   size_t n,
                                   double *out,
                                   size_t out_len);

/**
 * Ergosphere of a planar metric on a contour grid of spacing `h`.
 *
 * # Safety
 * `metric` must be a live handle, `out` a valid pointer.
 */
enum ArtbhStatus artbh_find_ergosphere(const struct ArtbhMetric *metric,
                                       double h,
                                       struct ArtbhCurve **out);

/**
 * Number of vertices, or 0 for a null handle.
 *
 * # Safety
 * `curve` must be a live handle or null.
 */
size_t artbh_curve_len(const struct ArtbhCurve *curve);

/**
 * Copy the vertices as interleaved `x1, x2` pairs (`2·len` doubles).
 *
 * # Safety
 * `xy` must hold `cap` doubles.
 */
enum ArtbhStatus artbh_curve_vertices(const struct ArtbhCurve *curve, double *xy, size_t cap);

/**
 * # Safety
 * `curve` must be a live handle or null.
 */
void artbh_curve_free(struct ArtbhCurve *curve);

/**
 * Limit-cycle horizon inside `ergosphere` with default finder options.
 * Returns `NoHorizon` (and no handle) when the finder shows there is none.
 *
 * # Safety
 * Handles must be live, `out` a valid pointer.
 */
enum ArtbhStatus artbh_find_horizon(const struct ArtbhMetric *metric,
                                    const struct ArtbhCurve *ergosphere,
                                    struct ArtbhHorizon **out);

/**
 * +1 for a black hole, −1 for a white hole, 0 for a null handle.
 *
 * # Safety
 * `horizon` must be a live handle or null.
 */
int artbh_horizon_kind(const struct ArtbhHorizon *horizon);

/**
 * Mean distance of the horizon from its centre (NaN for null).
 *
 * # Safety
 * `horizon` must be a live handle or null.
 */
double artbh_horizon_radius_mean(const struct ArtbhHorizon *horizon);

/**
 * Max normalised characteristic residual (NaN for null).
 *
 * # Safety
 * `horizon` must be a live handle or null.
 */
double artbh_horizon_residual(const struct ArtbhHorizon *horizon);

/**
 * A new curve handle holding the horizon curve.
 *
 * # Safety
 * `horizon` must be a live handle, `out` a valid pointer.
 */
enum ArtbhStatus artbh_horizon_curve(const struct ArtbhHorizon *horizon, struct ArtbhCurve **out);

/**
 * # Safety
 * `horizon` must be a live handle or null.
 */
void artbh_horizon_free(struct ArtbhHorizon *horizon);

/**
 * Kerr closed-form checks; `passed` is 1 when both bounds hold.
 *
 * # Safety
 * Output pointers must be valid.
 */
enum ArtbhStatus artbh_kerr_verify(double m,
                                   double a,
                                   size_t n_samples,
                                   double h,
                                   double *max_scaled_delta1,
                                   double *max_contour_error,
                                   int *passed);

/**
 * Serialise the horizon report as JSON into a new string, freed with
 * [`artbh_string_free`].
 *
 * # Safety
 * `horizon` must be a live handle, `out` a valid pointer.
 */
enum ArtbhStatus artbh_horizon_json(const struct ArtbhHorizon *horizon, char **out);

/**
 * # Safety
 * `s` must come from this library or be null.
 */
void artbh_string_free(char *s);

#endif  /* ARTBH_H */
