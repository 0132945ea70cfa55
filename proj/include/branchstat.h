/*
 * branchstat C API: statistics, validation and tuning of transmission branch
 * parameters from grid case files.
 *
 * All functions returning bs_status set a thread-local message retrievable
 * with bs_last_error() on failure. Handles are opaque; every bs_*_free
 * accepts NULL. Strings returned through char** out parameters are owned by
 * the caller and released with bs_string_free().
 */
#ifndef BRANCHSTAT_H
#define BRANCHSTAT_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define BS_API __declspec(dllexport)
#else
#define BS_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum bs_status {
  BS_OK = 0,
  BS_ERR_INVALID_ARGUMENT = 1,
  BS_ERR_PARSE = 2,
  BS_ERR_INSUFFICIENT_DATA = 3,
  BS_ERR_CANNOT_TUNE = 4,
  BS_ERR_IO = 5,
  BS_ERR_INTERNAL = 6
} bs_status;

typedef struct bs_case bs_case;             /* a parsed grid case */
typedef struct bs_analysis bs_analysis;     /* full statistics of an analyze run */
typedef struct bs_reference bs_reference;   /* validation/tuning envelope */
typedef struct bs_validation bs_validation; /* per-parameter verdicts */
typedef struct bs_tuning bs_tuning;         /* tuning plan + tuned case */

typedef struct bs_settings {
  int n_bins;              /* histogram bins, >= 2 (default 50) */
  int min_count;           /* minimum cleaned values per class (default 10) */
  double fence_multiplier; /* box-plot fence multiplier (default 3) */
  double class_tolerance;  /* voltage snap tolerance (default 0.05) */
  double ratio_lo;         /* validation band, 0 < lo < 1 (default 0.5) */
  double ratio_hi;         /* validation band, hi > 1 (default 2) */
  double b_threshold;      /* |b| below -> voltage independent (default 0.15) */
  double r2_threshold;     /* r2 below -> voltage independent (default 0.5) */
  uint64_t seed;           /* sampler seed (default 42) */
} bs_settings;

BS_API const char* bs_version(void);
BS_API const char* bs_last_error(void);
BS_API void bs_settings_init(bs_settings* settings);
BS_API void bs_string_free(char* text);

/* --- cases ---------------------------------------------------------------*/

/* Format from the extension (.m MATPOWER subset, .csv branch table), with a
 * content sniff as fallback. */
BS_API bs_status bs_case_open(const char* path, const bs_settings* settings, bs_case** out_case);
BS_API void bs_case_free(bs_case* c);
BS_API const char* bs_case_name(const bs_case* c);
BS_API size_t bs_case_branch_count(const bs_case* c);
BS_API size_t bs_case_warning_count(const bs_case* c);
BS_API const char* bs_case_warning(const bs_case* c, size_t index);

/* --- analysis ------------------------------------------------------------*/

BS_API bs_status bs_analyze(const bs_case* const* cases, size_t case_count,
                            const bs_settings* settings, bs_analysis** out_analysis);
BS_API void bs_analysis_free(bs_analysis* a);
BS_API const char* bs_analysis_case_name(const bs_analysis* a);
BS_API bs_status bs_analysis_write_bundle(const bs_analysis* a, const char* path);
BS_API bs_status bs_analysis_load_bundle(const char* path, bs_analysis** out_analysis);
BS_API bs_status bs_analysis_write_plot_csvs(const bs_analysis* a, const char* dir);
BS_API bs_status bs_analysis_summary(const bs_analysis* a, char** out_text);
BS_API bs_status bs_analysis_power_table(const bs_analysis* a, char** out_text);
BS_API bs_status bs_analysis_render_markdown(const bs_analysis* a, char** out_text);

/* --- references ----------------------------------------------------------*/

BS_API bs_status bs_reference_bundled(bs_reference** out_reference);
BS_API bs_status bs_reference_load(const char* bundle_path, bs_reference** out_reference);
BS_API bs_status bs_reference_from_analysis(const bs_analysis* a, bs_reference** out_reference);
BS_API void bs_reference_free(bs_reference* r);
BS_API const char* bs_reference_provenance(const bs_reference* r);

/* --- validation ----------------------------------------------------------*/

BS_API bs_status bs_validate(const bs_case* c, const bs_reference* r,
                             const bs_settings* settings, bs_validation** out_validation);
BS_API void bs_validation_free(bs_validation* v);
BS_API int bs_validation_tuning_required(const bs_validation* v); /* 1 if any TR row */
BS_API int bs_validation_all_no_data(const bs_validation* v);
BS_API bs_status bs_validation_render_table(const bs_validation* v, const char* case_name,
                                            char** out_text);
BS_API bs_status bs_validation_render_report(const bs_validation* v, const char* case_name,
                                             char** out_text);

/* --- tuning --------------------------------------------------------------*/

/* Reassigns the failing (parameter, class) populations from the reference
 * distributions. forced_failures entries are "parameter_token" or
 * "parameter_token:kv" and replace the internal validation pass when given. */
BS_API bs_status bs_tune(const bs_case* c, const bs_reference* r, const bs_settings* settings,
                         const char* const* forced_failures, size_t forced_count,
                         bs_tuning** out_tuning);
BS_API void bs_tuning_free(bs_tuning* t);
BS_API size_t bs_tuning_change_count(const bs_tuning* t);
BS_API bs_status bs_tuning_write_plan_csv(const bs_tuning* t, const char* path);
/* Writes the tuned case in the source case's format. */
BS_API bs_status bs_tuning_write_case(const bs_tuning* t, const char* path);
BS_API const char* bs_tuning_case_extension(const bs_tuning* t); /* "m" or "csv" */
BS_API bs_status bs_tuning_summary(const bs_tuning* t, char** out_text);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* BRANCHSTAT_H */
