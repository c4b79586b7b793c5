#ifndef JCR_H
#define JCR_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Status codes returned by every fallible function.
typedef enum JcrStatus {
  JCR_STATUS_OK = 0,
  JCR_STATUS_NULL_POINTER = 1,
  JCR_STATUS_INVALID_ARGUMENT = 2,
  JCR_STATUS_OUT_OF_WINDOW = 3,
  JCR_STATUS_GRID_MISMATCH = 4,
  JCR_STATUS_RANK_DEFICIENT = 5,
  JCR_STATUS_GROUP_TOO_LARGE = 6,
  JCR_STATUS_PARSE = 7,
  JCR_STATUS_IO = 8,
  JCR_STATUS_INTERNAL = 9,
  JCR_STATUS_PANIC = 10,
} JcrStatus;

// Opaque closed-form region: a band in `(θ, y)` or a θ-strip.
typedef struct JcrBand JcrBand;

// Opaque rasterized region.
typedef struct JcrGridRegion JcrGridRegion;

// Opaque coverage report.
typedef struct JcrReport JcrReport;

// Parameters of a band `lower <= y - slope*θ - intercept <= upper`.
// Infinite bounds are represented by IEEE infinities.
typedef struct JcrBandParams {
  double slope;
  double intercept;
  double lower;
  double upper;
  // 1 when the region is a θ-strip `[lower, upper]` with no y constraint.
  int32_t is_strip;
} JcrBandParams;

// Evenly spaced axis `lo, ..., hi` with `count >= 2` points.
typedef struct JcrAxis {
  double lo;
  double hi;
  size_t count;
} JcrAxis;

// Summary fields of a coverage report.
typedef struct JcrReportFields {
  uint64_t trials;
  uint64_t hits;
  double rate;
  double cp_lo;
  double cp_hi;
  double alpha;
  uint64_t seed;
} JcrReportFields;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Copies the last error message on this thread into `buf` (NUL terminated,
// truncated to `len`). Returns the full message length in bytes, or 0 when
// there is no error.
//
// # Safety
// `buf` must be null or point to `len` writable bytes.
size_t jcr_last_error(char *buf, size_t len);

// Library version as a static NUL-terminated string.
const char *jcr_version(void);

// Two-sided Clopper–Pearson interval for `hits` successes in `trials`.
//
// # Safety
// `lo` and `hi` must be valid for writes.
enum JcrStatus jcr_clopper_pearson(uint64_t hits,
                                   uint64_t trials,
                                   double conf,
                                   double *lo,
                                   double *hi);

// Normal-mean band indexed by `omega`; `omega_is_inf != 0` selects the
// infinite limit and ignores `omega`.
//
// # Safety
// `y` must point to `n` doubles; `out` must be valid for writes.
enum JcrStatus jcr_normal_mean_omega(const double *y,
                                     size_t n,
                                     double omega,
                                     int32_t omega_is_inf,
                                     double alpha,
                                     struct JcrBand **out);

// Student-t band `(y_te − x_te θ)/S ∈ [t_{α/2}, t_{1−α/2}]` for the
// one-feature model `y_i = x_i θ + ε_i`.
//
// # Safety
// `x` and `y` must point to `n` doubles; `out` must be valid for writes.
enum JcrStatus jcr_gaussian_pivot_band(const double *x,
                                       const double *y,
                                       size_t n,
                                       double x_te,
                                       double alpha,
                                       struct JcrBand **out);

// Weighted t-band with weights `w` (length `n`) on the calibration outcomes
// and `w_te` on the test outcome. Returns a strip when `w_te == 0`.
//
// # Safety
// `x`, `y` and `w` must point to `n` doubles; `out` must be valid for writes.
enum JcrStatus jcr_weighted_t_band(const double *x,
                                   const double *y,
                                   size_t n,
                                   double x_te,
                                   const double *w,
                                   double w_te,
                                   double alpha,
                                   struct JcrBand **out);

// # Safety
// `band` must be a live handle; `out` must be valid for writes.
enum JcrStatus jcr_band_params(const struct JcrBand *band, struct JcrBandParams *out);

// Writes 1 to `inside` when `(theta, y)` lies in the band, else 0.
//
// # Safety
// `band` must be a live handle; `inside` must be valid for writes.
enum JcrStatus jcr_band_contains(const struct JcrBand *band,
                                 double theta,
                                 double y,
                                 int32_t *inside);

// Rasterizes the band on the given grids.
//
// # Safety
// `band` must be a live handle; `out` must be valid for writes.
enum JcrStatus jcr_band_rasterize(const struct JcrBand *band,
                                  struct JcrAxis theta_axis,
                                  struct JcrAxis y_axis,
                                  struct JcrGridRegion **out);

// # Safety
// `band` must be null or a handle not yet freed.
void jcr_band_free(struct JcrBand *band);

// Cyclic-shift region with `α₁ = α/2`, `α₂ = 1 − α/2`.
//
// # Safety
// `x` and `y` must point to `n` doubles; `out` must be valid for writes.
enum JcrStatus jcr_cyclic_shift_region(const double *x,
                                       const double *y,
                                       size_t n,
                                       double x_te,
                                       double alpha,
                                       struct JcrAxis theta_axis,
                                       struct JcrAxis y_axis,
                                       struct JcrGridRegion **out);

// Randomized permutation region with `k` sampled permutations.
//
// # Safety
// `x` and `y` must point to `n` doubles; `out` must be valid for writes.
enum JcrStatus jcr_permutation_region(const double *x,
                                      const double *y,
                                      size_t n,
                                      double x_te,
                                      double alpha,
                                      size_t k,
                                      uint64_t seed,
                                      struct JcrAxis theta_axis,
                                      struct JcrAxis y_axis,
                                      struct JcrGridRegion **out);

// Product of the level `1 − α/2` confidence and prediction intervals.
//
// # Safety
// `x` and `y` must point to `n` doubles; `out` must be valid for writes.
enum JcrStatus jcr_intersection_region(const double *x,
                                       const double *y,
                                       size_t n,
                                       double x_te,
                                       double alpha,
                                       struct JcrAxis theta_axis,
                                       struct JcrAxis y_axis,
                                       struct JcrGridRegion **out);

// Grid sizes along θ and y.
//
// # Safety
// `region` must be a live handle; outputs must be valid for writes.
enum JcrStatus jcr_grid_region_dims(const struct JcrGridRegion *region,
                                    size_t *theta_count,
                                    size_t *y_count);

// Membership of cell `(i, j)`, θ index first.
//
// # Safety
// `region` must be a live handle; `inside` must be valid for writes.
enum JcrStatus jcr_grid_region_cell(const struct JcrGridRegion *region,
                                    size_t i,
                                    size_t j,
                                    int32_t *inside);

// Membership of the nearest cell to `(theta, y)`.
//
// # Safety
// `region` must be a live handle; `inside` must be valid for writes.
enum JcrStatus jcr_grid_region_contains(const struct JcrGridRegion *region,
                                        double theta,
                                        double y,
                                        int32_t *inside);

// Number of cells inside the region.
//
// # Safety
// `region` must be a live handle; `count` must be valid for writes.
enum JcrStatus jcr_grid_region_count_inside(const struct JcrGridRegion *region, size_t *count);

// Writes the region to `path`; the format follows the extension (`.json`
// or CSV otherwise).
//
// # Safety
// `region` must be a live handle; `path` must be a NUL-terminated string.
enum JcrStatus jcr_grid_region_export(const struct JcrGridRegion *region, const char *path);

// # Safety
// `region` must be null or a handle not yet freed.
void jcr_grid_region_free(struct JcrGridRegion *region);

// Coverage simulation on the default regression design (`x_i ~ U[0, 1]`,
// `x_te = 5`, `θ = 1`, `K = 500`) with the given sample size. `method` and
// `noise` use the command-line spellings. Multi-report methods return the
// first report.
//
// # Safety
// `method` and `noise` must be NUL-terminated strings; `out` must be valid
// for writes.
enum JcrStatus jcr_simulate(const char *method,
                            const char *noise,
                            size_t n,
                            double alpha,
                            uint64_t trials,
                            uint64_t seed,
                            struct JcrReport **out);

// # Safety
// `report` must be a live handle; `out` must be valid for writes.
enum JcrStatus jcr_report_fields(const struct JcrReport *report, struct JcrReportFields *out);

// Report as JSON in a newly allocated string; release it with
// [`jcr_string_free`].
//
// # Safety
// `report` must be a live handle; `out` must be valid for writes.
enum JcrStatus jcr_report_json(const struct JcrReport *report, char **out);

// # Safety
// `report` must be null or a handle not yet freed.
void jcr_report_free(struct JcrReport *report);

// # Safety
// `s` must be null or a string returned by this library and not yet freed.
void jcr_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* JCR_H */
