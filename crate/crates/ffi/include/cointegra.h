#ifndef COINTEGRA_H
#define COINTEGRA_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

#define CG_OK 0

#define CG_ERR_CONFIG 2

#define CG_ERR_DATA 3

#define CG_ERR_NUMERICAL 4

#define CG_ERR_NULL_POINTER 10

#define CG_ERR_INVALID_ARG 11

#define CG_ERR_PANIC 12

/**
 * Opaque set of aligned annual series.
 */
typedef struct CgDataset CgDataset;

typedef struct CgCriticalValues {
  double pct1;
  double pct5;
  double pct10;
} CgCriticalValues;

/**
 * ADF or PP outcome.
 */
typedef struct CgUnitRootResult {
  double statistic;
  /**
   * ADF: augmentation lags; PP: Bartlett bandwidth.
   */
  size_t lags_or_bandwidth;
  size_t n_obs;
  struct CgCriticalValues critical_values;
} CgUnitRootResult;

typedef struct CgZaResult {
  double statistic;
  /**
   * First year after the break.
   */
  int32_t break_year;
  size_t lags;
  struct CgCriticalValues critical_values;
} CgZaResult;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Build a dataset from `n_vars` series of `n_obs` values each, stored one
 * series after another in `values`, starting in `start_year`.
 *
 * # Safety
 * `names` must hold `n_vars` NUL-terminated strings and `values`
 * `n_vars * n_obs` doubles; `out` must be writable.
 */
int cg_dataset_new(const char *const *names,
                   const double *values,
                   size_t n_vars,
                   size_t n_obs,
                   int32_t start_year,
                   struct CgDataset **out);

/**
 * # Safety
 * `ds` must come from `cg_dataset_new` and not be used afterwards. Null is a no-op.
 */
void cg_dataset_free(struct CgDataset *ds);

/**
 * Augmented Dickey-Fuller test. `spec`: 0 none, 1 constant, 2 constant and
 * trend. `lags < 0` selects the lag by SC up to the Schwert maximum.
 *
 * # Safety
 * Pointers must be valid; `out` writable.
 */
int cg_adf(const struct CgDataset *ds,
           const char *name,
           int spec,
           int lags,
           struct CgUnitRootResult *out);

/**
 * Phillips-Perron Z(t). `bandwidth < 0` uses the automatic Newey-West rule.
 *
 * # Safety
 * Pointers must be valid; `out` writable.
 */
int cg_pp(const struct CgDataset *ds,
          const char *name,
          int spec,
          int bandwidth,
          struct CgUnitRootResult *out);

/**
 * Zivot-Andrews test. `model` is 'A', 'B' or 'C'.
 *
 * # Safety
 * Pointers must be valid; `out` writable.
 */
int cg_za(const struct CgDataset *ds,
          const char *name,
          char model,
          double trimming,
          int lags,
          struct CgZaResult *out);

/**
 * Johansen eigenvalues, descending, for all series of `ds`. Writes at most
 * `capacity` values to `out` and the number of variables to `out_len`;
 * fails with `CG_ERR_INVALID_ARG` if `capacity` is too small.
 *
 * # Safety
 * `out` must hold `capacity` doubles; `out_len` writable.
 */
int cg_johansen_eigenvalues(const struct CgDataset *ds,
                            size_t diff_lags,
                            int det_case_number,
                            double *out,
                            size_t capacity,
                            size_t *out_len);

/**
 * Cointegrating rank chosen by the sequential trace test at `alpha`
 * (0.01, 0.05 or 0.10).
 *
 * # Safety
 * `out_rank` writable.
 */
int cg_johansen_rank(const struct CgDataset *ds,
                     size_t diff_lags,
                     int det_case_number,
                     double alpha,
                     size_t *out_rank);

/**
 * DOLS long-run coefficients. `coefficients` and `std_errors` receive
 * `n_regressors + 1` values: the regressors in order, then the intercept.
 * `bandwidth < 0` picks the long-run variance bandwidth automatically.
 *
 * # Safety
 * `regressors` must hold `n_regressors` strings; both outputs
 * `n_regressors + 1` doubles.
 */
int cg_dols(const struct CgDataset *ds,
            const char *dependent,
            const char *const *regressors,
            size_t n_regressors,
            size_t leads,
            size_t lags,
            int bandwidth,
            double *coefficients,
            double *std_errors);

/**
 * Run the full pipeline on the CSV files in `data_dir`. `config_toml` may
 * be null for the defaults. The JSON report goes to `*out`; free it with
 * `cg_string_free`.
 *
 * # Safety
 * `data_dir` must be a valid string, `config_toml` null or a valid string.
 */
int cg_pipeline_json(const char *data_dir, const char *config_toml, char **out);

/**
 * # Safety
 * `s` must come from this library, or be null.
 */
void cg_string_free(char *s);

/**
 * Message of the last failure on this thread, or null. Valid until the
 * next call into the library from the same thread.
 */
const char *cg_last_error_message(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* COINTEGRA_H */
