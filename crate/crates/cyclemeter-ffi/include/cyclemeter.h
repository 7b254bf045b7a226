#ifndef CYCLEMETER_H
#define CYCLEMETER_H

/* Generated by cbindgen; do not edit by hand. */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

// Status codes returned by every fallible call.
typedef enum CmStatus {
  CM_STATUS_OK = 0,
  CM_STATUS_NULL_POINTER = 1,
  CM_STATUS_INVALID_UTF8 = 2,
  CM_STATUS_PARSE_ERROR = 3,
  CM_STATUS_CAPACITY_ERROR = 4,
  CM_STATUS_RANGE_ERROR = 5,
  CM_STATUS_DOMAIN_ERROR = 6,
  CM_STATUS_NUMERIC_RANGE_ERROR = 7,
  CM_STATUS_OVERFLOW_ERROR = 8,
  CM_STATUS_INTERNAL_ERROR = 9,
} CmStatus;

// Truncation selector for the order statistics.
typedef enum CmTruncation {
  // No truncation (b = n).
  CM_TRUNCATION_FULL = 0,
  // The canonical threshold b_n = n / ln^2 n.
  CM_TRUNCATION_BN = 1,
  // Explicit threshold passed separately.
  CM_TRUNCATION_AT = 2,
} CmTruncation;

// Functional selector for Monte Carlo runs.
typedef enum CmFunctional {
  CM_FUNCTIONAL_LOG_Y = 0,
  CM_FUNCTIONAL_LOG_O = 1,
  CM_FUNCTIONAL_DELTA = 2,
  CM_FUNCTIONAL_LOG_Y_TRUNC = 3,
  CM_FUNCTIONAL_LOG_O_TRUNC = 4,
  // Cycle count of the divisor class passed in `k`.
  CM_FUNCTIONAL_D_COUNT = 5,
} CmFunctional;

// Opaque normalization table handle.
typedef struct CmHTable CmHTable;

// Opaque von Mangoldt table handle.
typedef struct CmMangoldt CmMangoldt;

// Opaque weight model handle.
typedef struct CmModel CmModel;

// Opaque zeta-zeros table handle.
typedef struct CmZeros CmZeros;

// Summary statistics of a Monte Carlo run (plain value struct).
typedef struct CmSampleStats {
  uint64_t count;
  double mean;
  double variance;
  double se;
  double min;
  double max;
} CmSampleStats;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the most recent error on this thread. The pointer stays valid
// until the next failing call on the same thread.
const char *cm_last_error_message(void);

// Crate version as a static string.
const char *cm_version(void);

// Parse a weight-spec string (`uniform`, `ewens:<t>`, `poly:<g>`, ...).
//
// # Safety
// `spec` must be a valid NUL-terminated string and `out` a writable
// pointer. The returned handle must be released with `cm_model_free`.
enum CmStatus cm_model_parse(const char *spec, struct CmModel **out);

// # Safety
// `model` must come from `cm_model_parse` and not be used afterwards.
void cm_model_free(struct CmModel *model);

// Build the normalization table h_0..h_limit for a model.
//
// # Safety
// `model` must be a live handle, `out` writable; free the result with
// `cm_htable_free`.
enum CmStatus cm_htable_build(const struct CmModel *model, uintptr_t limit, struct CmHTable **out);

// # Safety
// `table` must come from `cm_htable_build` and not be used afterwards.
void cm_htable_free(struct CmHTable *table);

// Largest index stored in the table.
//
// # Safety
// `table` must be a live handle.
uintptr_t cm_htable_limit(const struct CmHTable *table);

// log h_n.
//
// # Safety
// `table` must be a live handle and `out` writable.
enum CmStatus cm_htable_log_h(const struct CmHTable *table, uintptr_t n, double *out);

// Sieve von Mangoldt values up to `limit`.
//
// # Safety
// `out` must be writable; free the result with `cm_mangoldt_free`.
enum CmStatus cm_mangoldt_build(uintptr_t limit, struct CmMangoldt **out);

// # Safety
// `table` must come from `cm_mangoldt_build` and not be used afterwards.
void cm_mangoldt_free(struct CmMangoldt *table);

// Chebyshev psi(x).
//
// # Safety
// `table` must be a live handle and `out` writable.
enum CmStatus cm_mangoldt_psi(const struct CmMangoldt *table, uintptr_t x, double *out);

// Lambda(k).
//
// # Safety
// `table` must be a live handle and `out` writable.
enum CmStatus cm_mangoldt_lambda(const struct CmMangoldt *table, uintptr_t k, double *out);

// The bundled table of the first 100 zeta zeros.
//
// # Safety
// `out` must be writable; free the result with `cm_zeros_free`.
enum CmStatus cm_zeros_bundled(struct CmZeros **out);

// Load a zeros table from a text file (`#` comments, ascending positives).
//
// # Safety
// `path` must be a valid NUL-terminated string, `out` writable.
enum CmStatus cm_zeros_load(const char *path, struct CmZeros **out);

// # Safety
// `zeros` must come from a `cm_zeros_*` constructor and not be used
// afterwards.
void cm_zeros_free(struct CmZeros *zeros);

// Number of zeros in the table.
//
// # Safety
// `zeros` must be a live handle.
uintptr_t cm_zeros_count(const struct CmZeros *zeros);

// E[log Y_n] (truncated per the selector).
//
// # Safety
// `table` must be a live handle and `out` writable.
enum CmStatus cm_expect_log_y(const struct CmHTable *table,
                              uintptr_t n,
                              enum CmTruncation trunc,
                              uintptr_t threshold,
                              double *out);

// E[log O_n] (truncated per the selector).
//
// # Safety
// `table` and `mangoldt` must be live handles and `out` writable.
enum CmStatus cm_expect_log_o(const struct CmHTable *table,
                              const struct CmMangoldt *mangoldt,
                              uintptr_t n,
                              enum CmTruncation trunc,
                              uintptr_t threshold,
                              double *out);

// `E[D_nk]`.
//
// # Safety
// `table` must be a live handle and `out` writable.
enum CmStatus cm_expect_dnk(const struct CmHTable *table,
                            uintptr_t n,
                            uintptr_t k,
                            enum CmTruncation trunc,
                            uintptr_t threshold,
                            double *out);

// P(D*_nk = 0).
//
// # Safety
// `table` must be a live handle and `out` writable.
enum CmStatus cm_p_dnk_zero(const struct CmHTable *table,
                            uintptr_t n,
                            uintptr_t k,
                            enum CmTruncation trunc,
                            uintptr_t threshold,
                            double *out);

// E[e^{(s_re + i s_im) log Y_n}], truncated per the selector.
//
// # Safety
// `table` must be a live handle; `out_re` and `out_im` writable.
enum CmStatus cm_mgf_log_y(const struct CmHTable *table,
                           uintptr_t n,
                           double s_re,
                           double s_im,
                           enum CmTruncation trunc,
                           uintptr_t threshold,
                           double *out_re,
                           double *out_im);

// Explicit-formula psi(x) over the zeros table.
//
// # Safety
// `zeros` must be a live handle; `out_value` and `out_residue` writable.
enum CmStatus cm_psi_explicit(const struct CmZeros *zeros,
                              double x,
                              double *out_value,
                              double *out_residue);

// Fenchel-Legendre rate function of the generalized-Ewens family
// (vartheta-scaled when `scaled` is nonzero).
//
// # Safety
// `out` must be writable.
enum CmStatus cm_rate_function_ge(double theta, double x, int32_t scaled, double *out);

// Fenchel-Legendre rate function of the polynomial family.
//
// # Safety
// `out` must be writable.
enum CmStatus cm_rate_function_poly(double gamma, double x, double *out);

// Precise-deviations main term for the generalized-Ewens family; also
// reports sigma_n^2.
//
// # Safety
// `out_probability` and `out_scale` must be writable.
enum CmStatus cm_precise_dev_ge(double theta,
                                double x,
                                uintptr_t n,
                                double *out_probability,
                                double *out_scale);

// Central limit standardization (L - (t/2) log^2 n)/sqrt((t/3) log^3 n).
//
// # Safety
// `out` must be writable.
enum CmStatus cm_erdos_turan_standardize(double l, uintptr_t n, double theta, double *out);

// Deterministic Monte Carlo over a functional; fills a value struct.
// `mangoldt` may be NULL for functionals that do not need it. `k` is only
// read for `CmFunctional::DCount`.
//
// # Safety
// `table` must be a live handle, `mangoldt` NULL or live, `out` writable.
enum CmStatus cm_monte_carlo(const struct CmHTable *table,
                             const struct CmMangoldt *mangoldt,
                             enum CmFunctional functional,
                             uintptr_t k,
                             uintptr_t n,
                             uint64_t samples,
                             uint64_t seed,
                             uintptr_t workers,
                             struct CmSampleStats *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* CYCLEMETER_H */
