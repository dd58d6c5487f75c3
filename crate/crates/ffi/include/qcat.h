#ifndef QCAT_H
#define QCAT_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum QcatPeakKind {
  QCAT_PEAK_KIND_INITIAL = 0,
  QCAT_PEAK_KIND_REVIVAL = 1,
  QCAT_PEAK_KIND_COLLAPSE = 2,
  QCAT_PEAK_KIND_UNCLASSIFIED = 3,
} QcatPeakKind;

/**
 * Status codes returned by every function.
 */
typedef enum QcatStatus {
  QCAT_STATUS_OK = 0,
  QCAT_STATUS_NULL_POINTER = 1,
  QCAT_STATUS_INVALID_PARAMETER = 2,
  QCAT_STATUS_DIMENSION_MISMATCH = 3,
  QCAT_STATUS_NON_CONVERGENCE = 4,
  QCAT_STATUS_NORM_DRIFT = 5,
  QCAT_STATUS_TRUNCATION_LEAK = 6,
  QCAT_STATUS_EMPTY_SERIES = 7,
  QCAT_STATUS_PARSE = 8,
  QCAT_STATUS_IO = 9,
  QCAT_STATUS_OUT_OF_RANGE = 10,
  QCAT_STATUS_PANIC = 11,
} QcatStatus;

/**
 * Opaque handle to a finished run.
 */
typedef struct QcatRun QcatRun;

/**
 * System parameters; frequencies in units of the Rabi frequency.
 */
typedef struct QcatParams {
  double omega_bar;
  double delta_bar;
  double epsilon;
  double beta_re;
  double beta_im;
  double phi;
  double tau;
  uint32_t n_max;
} QcatParams;

/**
 * One sample of the observables on the plotted-time grid.
 */
typedef struct QcatSample {
  double t_plot;
  double p_g;
  double p_e;
  double inversion;
  double coherence_re;
  double coherence_im;
  double p_g1;
  double p_e1;
  double p_g2;
  double p_e2;
  double s_p;
} QcatSample;

typedef struct QcatPeak {
  double t_plot;
  double s_value;
  enum QcatPeakKind kind;
  double envelope_amplitude;
} QcatPeak;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failure on this thread, or null. The pointer stays
 * valid until the next failing call on the same thread.
 */
const char *qcat_last_error_message(void);

/**
 * Fills `out` with the default parameter set.
 *
 * # Safety
 * `out` must be null or point to writable memory for one `QcatParams`.
 */
enum QcatStatus qcat_params_default(struct QcatParams *out);

/**
 * Evolves the cat state and both branches from `params` up to plotted time
 * `t_end_plot` with physical step `dt`, using defaults for everything else.
 *
 * # Safety
 * `params` must point to a valid `QcatParams`; `out` must be writable. On
 * success `*out` owns a handle to be released with `qcat_run_free`.
 */
enum QcatStatus qcat_run_new(const struct QcatParams *params,
                             double t_end_plot,
                             double dt,
                             struct QcatRun **out);

/**
 * Like `qcat_run_new` with a full JSON run configuration.
 *
 * # Safety
 * `json` must be a nul-terminated string; `out` must be writable.
 */
enum QcatStatus qcat_run_from_json(const char *json, struct QcatRun **out);

/**
 * Releases a run handle. Null is ignored.
 *
 * # Safety
 * `run` must be null or a handle from this library not yet freed.
 */
void qcat_run_free(struct QcatRun *run);

/**
 * Number of time samples in the run.
 *
 * # Safety
 * `run` must be a live handle and `out` writable.
 */
enum QcatStatus qcat_run_sample_count(const struct QcatRun *run, size_t *out);

/**
 * Observables at sample `index`.
 *
 * # Safety
 * `run` must be a live handle and `out` writable.
 */
enum QcatStatus qcat_run_sample(const struct QcatRun *run, size_t index, struct QcatSample *out);

/**
 * Number of classified S(P) peaks, the initial record included.
 *
 * # Safety
 * `run` must be a live handle and `out` writable.
 */
enum QcatStatus qcat_run_peak_count(const struct QcatRun *run, size_t *out);

/**
 * # Safety
 * `run` must be a live handle and `out` writable.
 */
enum QcatStatus qcat_run_peak(const struct QcatRun *run, size_t index, struct QcatPeak *out);

/**
 * Writes the run's files (`timeseries.csv`, `peaks.csv`, `run_meta.json`)
 * into `dir`, creating it if needed.
 *
 * # Safety
 * `run` must be a live handle; `dir` a nul-terminated path.
 */
enum QcatStatus qcat_run_write(const struct QcatRun *run, const char *dir);

/**
 * `<m|F_q|n>` of the laser coupling operator.
 *
 * # Safety
 * `re` and `im` must be writable.
 */
enum QcatStatus qcat_fq_element(uint32_t m,
                                uint32_t n,
                                double epsilon,
                                double tau,
                                double *re,
                                double *im);

/**
 * The q-number `[x]_q` with `q = e^tau`.
 *
 * # Safety
 * `out` must be writable.
 */
enum QcatStatus qcat_q_number(double x, double tau, double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* QCAT_H */
