#ifndef EPRB_H
#define EPRB_H

/* Generated by cbindgen from crates/ffi/src. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result codes. Zero is success.
 */
typedef enum EprbStatus {
  EPRB_STATUS_OK = 0,
  EPRB_STATUS_NULL_POINTER = 1,
  EPRB_STATUS_INVALID_UTF8 = 2,
  EPRB_STATUS_CONFIG = 3,
  EPRB_STATUS_PARSE = 4,
  EPRB_STATUS_NO_DATA = 5,
  EPRB_STATUS_DOMAIN = 6,
  EPRB_STATUS_DEGENERATE_MODEL = 7,
  EPRB_STATUS_MODEL = 8,
  EPRB_STATUS_IO = 9,
  EPRB_STATUS_FORMAT = 10,
  EPRB_STATUS_OUT_OF_RANGE = 11,
  EPRB_STATUS_PANIC = 12,
} EprbStatus;

/**
 * Parsed experiment configuration.
 */
typedef struct EprbConfig EprbConfig;

/**
 * Statistics of one completed run.
 */
typedef struct EprbSummary EprbSummary;

/**
 * One row of the window sweep. When `sufficient` is 0 some setting pair
 * kept no trials and the correlation fields are NaN.
 */
typedef struct EprbWindowRow {
  double window_over_t;
  double e_ab;
  double e_abp;
  double e_apb;
  double e_apbp;
  /**
   * largest |S| over the four sign placements
   */
  double s;
  /**
   * S with the minus sign on (a1', a2')
   */
  double s_fixed;
  double s_standard_error;
  double retention_min;
  int sufficient;
} EprbWindowRow;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or NULL. The pointer is
 * valid until the next failing call on the same thread.
 */
const char *eprb_last_error(void);

/**
 * Sawtooth correlation of the unselected model at settings `a`, `b`.
 */
double eprb_sawtooth(double a, double b);

/**
 * Singlet-state correlation `-cos 2(a - b)`.
 */
double eprb_quantum(double a, double b);

/**
 * Probability that a pair with squared sines `s1_sq`, `s2_sq` passes a
 * window of width `w` (in units of the time scale) when `r ~ U[r_min, 1]`.
 *
 * # Safety
 * `out` must be NULL or point to writable storage for one double.
 */
enum EprbStatus eprb_acceptance(double s1_sq, double s2_sq, double w, double r_min, double *out);

/**
 * Default configuration.
 *
 * # Safety
 * `out` must point to writable storage for one pointer.
 */
enum EprbStatus eprb_config_default(struct EprbConfig **out);

/**
 * Parses a `key = value` configuration document.
 *
 * # Safety
 * `text` must be a NUL-terminated string and `out` must point to writable
 * storage for one pointer. On failure `*out` is left untouched.
 */
enum EprbStatus eprb_config_parse(const char *text, struct EprbConfig **out);

/**
 * # Safety
 * `config` must be a live handle.
 */
enum EprbStatus eprb_config_set_seed(struct EprbConfig *config, uint64_t seed);

/**
 * # Safety
 * `config` must be a live handle.
 */
enum EprbStatus eprb_config_set_n_per_setting(struct EprbConfig *config, size_t n);

/**
 * Sets the directory [`eprb_run_to_dir`] writes into.
 *
 * # Safety
 * `config` must be a live handle and `dir` a NUL-terminated string.
 */
enum EprbStatus eprb_config_set_output_dir(struct EprbConfig *config, const char *dir);

/**
 * # Safety
 * `config` must be NULL or a handle not yet freed.
 */
void eprb_config_free(struct EprbConfig *config);

/**
 * Runs the experiment in memory. `threads == 0` uses the default pool.
 *
 * # Safety
 * `config` must be a live handle and `out` must point to writable storage
 * for one pointer.
 */
enum EprbStatus eprb_run(const struct EprbConfig *config, size_t threads, struct EprbSummary **out);

/**
 * Like [`eprb_run`], and also writes `events.csv`, `sweep.csv` and
 * `summary.json` to the configured output directory.
 *
 * # Safety
 * Same as [`eprb_run`].
 */
enum EprbStatus eprb_run_to_dir(const struct EprbConfig *config,
                                size_t threads,
                                struct EprbSummary **out);

/**
 * Number of generated events, or 0 for a NULL handle.
 *
 * # Safety
 * `summary` must be NULL or a live handle.
 */
size_t eprb_summary_event_count(const struct EprbSummary *summary);

/**
 * Number of sweep rows, or 0 for a NULL handle.
 *
 * # Safety
 * `summary` must be NULL or a live handle.
 */
size_t eprb_summary_window_count(const struct EprbSummary *summary);

/**
 * Copies sweep row `index` into `*out`.
 *
 * # Safety
 * `summary` must be a live handle and `out` must point to writable storage
 * for one row.
 */
enum EprbStatus eprb_summary_window(const struct EprbSummary *summary,
                                    size_t index,
                                    struct EprbWindowRow *out);

/**
 * The statistics without any window, as a row with `window_over_t = NaN`
 * and `retention_min = 1`.
 *
 * # Safety
 * `summary` must be a live handle and `out` must point to writable storage
 * for one row.
 */
enum EprbStatus eprb_summary_unselected(const struct EprbSummary *summary,
                                        struct EprbWindowRow *out);

/**
 * The `summary.json` document. Release it with [`eprb_string_free`].
 *
 * # Safety
 * `summary` must be a live handle and `out` must point to writable storage
 * for one pointer.
 */
enum EprbStatus eprb_summary_json(const struct EprbSummary *summary, char **out);

/**
 * # Safety
 * `summary` must be NULL or a handle not yet freed.
 */
void eprb_summary_free(struct EprbSummary *summary);

/**
 * # Safety
 * `s` must be NULL or a string returned by this library and not yet freed.
 */
void eprb_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* EPRB_H */
