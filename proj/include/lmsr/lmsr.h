/* Copyright 2026 The lmsr Authors
 * SPDX-License-Identifier: Apache-2.0
 */

#ifndef LMSR_LMSR_H
#define LMSR_LMSR_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#  if defined(LMSR_BUILDING_SHARED)
#    define LMSR_API __declspec(dllexport)
#  else
#    define LMSR_API __declspec(dllimport)
#  endif
#else
#  define LMSR_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

/* Every call returns a status; on failure lmsr_last_error() describes it. */
typedef enum lmsr_status {
    LMSR_OK = 0,
    LMSR_E_INVALID_ARGUMENT,
    LMSR_E_SYNTAX,
    LMSR_E_UNKNOWN_OPERATOR,
    LMSR_E_IMPLICIT_FORM,
    LMSR_E_ARITY_MISMATCH,
    LMSR_E_OPERATOR_NOT_ALLOWED,
    LMSR_E_TOO_MANY_CONSTANTS,
    LMSR_E_MISSING_VARIABLE,
    LMSR_E_NO_FINITE_OBJECTIVE,
    LMSR_E_UNKNOWN_DATASET,
    LMSR_E_MALFORMED_CSV,
    LMSR_E_NON_NUMERIC_CELL,
    LMSR_E_IO,
    LMSR_E_CONFIG,
    LMSR_E_TRANSPORT,
    LMSR_E_API,
    LMSR_E_TRANSCRIPT_EXHAUSTED,
    LMSR_E_UNKNOWN_MODEL,
    LMSR_E_MISSING_DATA,
    LMSR_E_INVALID_FEEDBACK,
    LMSR_E_SAMPLE_TOO_LARGE,
    LMSR_E_INTERNAL
} lmsr_status;

typedef struct lmsr_dataset lmsr_dataset;
typedef struct lmsr_expr lmsr_expr;
typedef struct lmsr_config lmsr_config;
typedef struct lmsr_runlog lmsr_runlog;

LMSR_API const char* lmsr_version(void);
/* Message of the last failed call on this thread; "" when none. */
LMSR_API const char* lmsr_last_error(void);
LMSR_API const char* lmsr_status_name(lmsr_status status);
/* Frees strings returned through char** out-parameters. */
LMSR_API void lmsr_string_free(char* s);

/* ---- datasets ---- */
LMSR_API lmsr_status lmsr_dataset_load_builtin(const char* id, lmsr_dataset** out);
LMSR_API lmsr_status lmsr_dataset_load_csv(const char* path, lmsr_dataset** out);
LMSR_API void lmsr_dataset_free(lmsr_dataset* d);
LMSR_API size_t lmsr_dataset_rows(const lmsr_dataset* d);
LMSR_API size_t lmsr_dataset_inputs(const lmsr_dataset* d);
/* Text table of the bundled datasets. */
LMSR_API lmsr_status lmsr_datasets_table(char** out);
/* Text table of the reference results stored for a bundled dataset. */
LMSR_API lmsr_status lmsr_reference_table(const char* id, char** out);

/* ---- expressions ---- */
/* dialect: "infix" or "latex"; variables are named x1..x<n_vars>. */
LMSR_API lmsr_status lmsr_expr_parse(const char* text, const char* dialect, size_t n_vars, lmsr_expr** out);
LMSR_API void lmsr_expr_free(lmsr_expr* e);
LMSR_API lmsr_status lmsr_expr_render(const lmsr_expr* e, char** out);
LMSR_API lmsr_status lmsr_expr_canonical(const lmsr_expr* e, char** out);
LMSR_API size_t lmsr_expr_complexity(const lmsr_expr* e);
LMSR_API size_t lmsr_expr_constant_count(const lmsr_expr* e);
/* 1 when SR-equivalent, 0 otherwise. */
LMSR_API int lmsr_expr_equivalent(const lmsr_expr* a, const lmsr_expr* b);

/* ---- fitting ---- */
typedef struct lmsr_fit_options {
    int hops;
    int refits;
    int max_evals;
    double tol;
    uint64_t seed;
} lmsr_fit_options;

typedef struct lmsr_fit_result {
    double mse;
    double mae;
    long evals;
    size_t n_params;
} lmsr_fit_result;

LMSR_API lmsr_fit_options lmsr_fit_options_default(void);
/* Writes up to `capacity` fitted constants to `params`. */
LMSR_API lmsr_status lmsr_fit(const lmsr_expr* e, const lmsr_dataset* d, const lmsr_fit_options* options,
                              double* params, size_t capacity, lmsr_fit_result* result);

/* ---- run configuration ---- */
LMSR_API lmsr_status lmsr_config_new(lmsr_config** out);
LMSR_API lmsr_status lmsr_config_parse(const char* ini, lmsr_config** out);
LMSR_API lmsr_status lmsr_config_load(const char* path, lmsr_config** out);
LMSR_API void lmsr_config_free(lmsr_config* c);
/* Same keys as the config file, e.g. ("run", "iterations", "50"). */
LMSR_API lmsr_status lmsr_config_set(lmsr_config* c, const char* section, const char* key, const char* value);
LMSR_API lmsr_status lmsr_config_validate(const lmsr_config* c);
LMSR_API lmsr_status lmsr_config_to_ini(const lmsr_config* c, char** out);
LMSR_API int lmsr_config_runs(const lmsr_config* c);
LMSR_API int lmsr_config_iterations(const lmsr_config* c);

/* ---- runs ---- */
/* Receives each JSON record as it is produced. */
typedef void (*lmsr_record_fn)(const char* jsonl_line, void* user);

/* One run with the configured backend. Backend failures still return
 * LMSR_OK with a log whose lmsr_runlog_completed() is 0. */
LMSR_API lmsr_status lmsr_run(const lmsr_config* c, int run_number, lmsr_record_fn on_record, void* user,
                              lmsr_runlog** out);
/* All configured runs, written to <out_dir>/run<N>.jsonl as they progress.
 * `logs` must hold lmsr_config_runs(c) handles. */
LMSR_API lmsr_status lmsr_run_all(const lmsr_config* c, const char* out_dir, lmsr_runlog** logs);

LMSR_API lmsr_status lmsr_runlog_read(const char* path, lmsr_runlog** out);
LMSR_API lmsr_status lmsr_runlog_write(const lmsr_runlog* log, const char* path);
LMSR_API void lmsr_runlog_free(lmsr_runlog* log);
LMSR_API int lmsr_runlog_run(const lmsr_runlog* log);
LMSR_API const char* lmsr_runlog_dataset(const lmsr_runlog* log);
/* Header target expression, or NULL. */
LMSR_API const char* lmsr_runlog_target(const lmsr_runlog* log);
LMSR_API int lmsr_runlog_iterations(const lmsr_runlog* log);
/* Iteration of the rediscovery, or 0 when the target was not found. */
LMSR_API int lmsr_runlog_rediscovery(const lmsr_runlog* log);
LMSR_API int lmsr_runlog_completed(const lmsr_runlog* log);
/* Why the run stopped early, or NULL. */
LMSR_API const char* lmsr_runlog_error(const lmsr_runlog* log);
LMSR_API void lmsr_runlog_usage(const lmsr_runlog* log, long* prompt_tokens, long* completion_tokens);
/* 1 and *cost set when the model has a price entry, else 0. */
LMSR_API int lmsr_runlog_cost(const lmsr_runlog* log, double* cost);
LMSR_API size_t lmsr_runlog_store_size(const lmsr_runlog* log);
LMSR_API lmsr_status lmsr_runlog_store_csv(const lmsr_runlog* log, char** out);
/* Number of expressions sent to the optimizer. */
LMSR_API size_t lmsr_runlog_fit_count(const lmsr_runlog* log);

/* Re-runs the log against its own responses. *ok is 1 when everything
 * matched within rel_tol; *report lists the divergences otherwise. */
LMSR_API lmsr_status lmsr_replay(const lmsr_runlog* log, double rel_tol, int* ok, char** report);

typedef enum lmsr_score_mode { LMSR_SCORE_CUMULATIVE = 0, LMSR_SCORE_FRONT = 1 } lmsr_score_mode;

/* scores[i] for iterations 1..n_iterations. `target` is an infix expression
 * or a bundled dataset id. */
LMSR_API lmsr_status lmsr_score(const lmsr_runlog* const* logs, size_t n_logs, const char* target,
                                int n_iterations, lmsr_score_mode mode, int* scores);

/* Pareto front of the union of the logs' stores as "complexity,mse,equation". */
LMSR_API lmsr_status lmsr_front_csv(const lmsr_runlog* const* logs, size_t n_logs, char** out);

#ifdef __cplusplus
}
#endif

#endif /* LMSR_LMSR_H */
