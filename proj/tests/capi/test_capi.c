/* Copyright 2026 The lmsr Authors
 * SPDX-License-Identifier: Apache-2.0
 */

/* Exercises the shared library through its C header only. */

#include "lmsr/lmsr.h"

#include <math.h>
#include <stdio.h>
#include <stdlib.h>
#include <string.h>

static int failures = 0;

#define CHECK(cond)                                                         \
    do {                                                                    \
        if (!(cond)) {                                                      \
            fprintf(stderr, "%s:%d: CHECK(%s) failed; last error: %s\n",    \
                    __FILE__, __LINE__, #cond, lmsr_last_error());          \
            ++failures;                                                     \
        }                                                                   \
    } while (0)

static void expressions(void) {
    lmsr_expr *a = NULL, *b = NULL, *bad = NULL;
    char* text = NULL;
    CHECK(lmsr_expr_parse("c1*x1/(c2+x1)", "infix", 1, &a) == LMSR_OK);
    CHECK(lmsr_expr_parse("x1*c3/(x1+c4)", "infix", 1, &b) == LMSR_OK);
    CHECK(lmsr_expr_equivalent(a, b) == 1);
    CHECK(lmsr_expr_complexity(a) == 7);
    CHECK(lmsr_expr_constant_count(b) == 2);
    CHECK(lmsr_expr_render(a, &text) == LMSR_OK && strcmp(text, "c1*x1/(c2+x1)") == 0);
    lmsr_string_free(text);

    CHECK(lmsr_expr_parse("c1*(x1", "infix", 1, &bad) == LMSR_E_SYNTAX);
    CHECK(bad == NULL);
    CHECK(strlen(lmsr_last_error()) > 0);
    CHECK(strcmp(lmsr_status_name(LMSR_E_SYNTAX), "SyntaxError") == 0);
    CHECK(lmsr_expr_parse("\\frac{c_1 x_1}{c_2 + x_1}", "latex", 1, &bad) == LMSR_OK);
    CHECK(lmsr_expr_equivalent(a, bad) == 1);
    lmsr_expr_free(bad);

    lmsr_dataset* d = NULL;
    CHECK(lmsr_dataset_load_builtin("langmuir", &d) == LMSR_OK);
    CHECK(lmsr_dataset_inputs(d) == 1);
    CHECK(lmsr_dataset_rows(d) > 0);
    lmsr_fit_options opts = lmsr_fit_options_default();
    double params[4] = {0};
    lmsr_fit_result r;
    CHECK(lmsr_fit(a, d, &opts, params, 4, &r) == LMSR_OK);
    CHECK(r.n_params == 2);
    CHECK(r.mse > 0 && r.mse < 0.1);
    CHECK(lmsr_fit(a, NULL, &opts, params, 4, &r) == LMSR_E_INVALID_ARGUMENT);
    CHECK(lmsr_dataset_load_builtin("nope", &d) == LMSR_E_UNKNOWN_DATASET);

    lmsr_dataset_free(d);
    lmsr_expr_free(a);
    lmsr_expr_free(b);
}

static const char* transcript =
    "The curve saturates.\nBEGIN_EXPRESSIONS\nc1*x1\nc1*x1/(c2+x1)\nc1+c2*x1\nEND_EXPRESSIONS\n"
    "=== END RESPONSE ===\n"
    "BEGIN_EXPRESSIONS\nc1*x1*x1\nEND_EXPRESSIONS\n"
    "=== END RESPONSE ===\n";

static void record_counter(const char* line, void* user) {
    (void)line;
    ++*(int*)user;
}

static void runs(const char* tmp) {
    char path[512], out_dir[512], log_path[512];
    snprintf(path, sizeof path, "%s/capi_transcript.txt", tmp);
    snprintf(out_dir, sizeof out_dir, "%s/capi_runs", tmp);
    FILE* f = fopen(path, "w");
    CHECK(f != NULL);
    if (!f) return;
    fputs(transcript, f);
    fclose(f);

    lmsr_config* c = NULL;
    CHECK(lmsr_config_new(&c) == LMSR_OK);
    CHECK(lmsr_config_set(c, "run", "iterations", "2") == LMSR_OK);
    CHECK(lmsr_config_set(c, "run", "runs", "2") == LMSR_OK);
    CHECK(lmsr_config_set(c, "fit", "hops", "3") == LMSR_OK);
    CHECK(lmsr_config_set(c, "backend", "kind", "scripted") == LMSR_OK);
    CHECK(lmsr_config_set(c, "backend", "transcript", path) == LMSR_OK);
    CHECK(lmsr_config_set(c, "run", "bogus", "1") == LMSR_E_CONFIG);
    CHECK(lmsr_config_validate(c) == LMSR_OK);
    CHECK(lmsr_config_runs(c) == 2);
    CHECK(lmsr_config_iterations(c) == 2);

    int records = 0;
    lmsr_runlog* log = NULL;
    CHECK(lmsr_run(c, 1, record_counter, &records, &log) == LMSR_OK);
    CHECK(records == 4); /* header, two iterations, summary */
    CHECK(lmsr_runlog_completed(log) == 1);
    CHECK(lmsr_runlog_rediscovery(log) == 1);
    CHECK(lmsr_runlog_fit_count(log) == 4);
    CHECK(lmsr_runlog_store_size(log) == 4);
    CHECK(strcmp(lmsr_runlog_dataset(log), "langmuir") == 0);

    int ok = 0;
    char* report = NULL;
    CHECK(lmsr_replay(log, 1e-9, &ok, &report) == LMSR_OK);
    CHECK(ok == 1);
    lmsr_string_free(report);

    snprintf(log_path, sizeof log_path, "%s/capi_run1.jsonl", tmp);
    CHECK(lmsr_runlog_write(log, log_path) == LMSR_OK);
    lmsr_runlog* back = NULL;
    CHECK(lmsr_runlog_read(log_path, &back) == LMSR_OK);
    CHECK(lmsr_runlog_rediscovery(back) == 1);

    lmsr_runlog* all[2] = {NULL, NULL};
    CHECK(lmsr_run_all(c, out_dir, all) == LMSR_OK);
    int scores[2] = {0, 0};
    CHECK(lmsr_score((const lmsr_runlog* const*)all, 2, "langmuir", 2, LMSR_SCORE_CUMULATIVE, scores) == LMSR_OK);
    CHECK(scores[0] == 2 && scores[1] == 2);
    CHECK(lmsr_score((const lmsr_runlog* const*)all, 2, "c1*x1^2", 2, LMSR_SCORE_CUMULATIVE, scores) == LMSR_OK);
    CHECK(scores[0] == 0 && scores[1] == 0);

    char* csv = NULL;
    CHECK(lmsr_front_csv((const lmsr_runlog* const*)all, 2, &csv) == LMSR_OK);
    CHECK(csv && strncmp(csv, "complexity,mse,equation\n", 24) == 0);
    CHECK(csv && strstr(csv, "c1*x1/(c2+x1)") != NULL);
    lmsr_string_free(csv);

    lmsr_runlog_free(all[0]);
    lmsr_runlog_free(all[1]);
    lmsr_runlog_free(back);
    lmsr_runlog_free(log);

    /* A transcript shorter than the run stops it without failing the call. */
    CHECK(lmsr_config_set(c, "run", "iterations", "5") == LMSR_OK);
    CHECK(lmsr_run(c, 1, NULL, NULL, &log) == LMSR_OK);
    CHECK(lmsr_runlog_completed(log) == 0);
    CHECK(lmsr_runlog_iterations(log) == 2);
    CHECK(lmsr_runlog_error(log) != NULL);
    lmsr_runlog_free(log);
    lmsr_config_free(c);
}

int main(int argc, char** argv) {
    const char* tmp = argc > 1 ? argv[1] : ".";
    CHECK(strlen(lmsr_version()) > 0);
    expressions();
    runs(tmp);
    if (failures) {
        fprintf(stderr, "%d checks failed\n", failures);
        return 1;
    }
    printf("C API checks passed\n");
    return 0;
}
