/* Copyright 2026 The revsum Authors
 * SPDX-License-Identifier: Apache-2.0
 *
 * C interface to the revsum library. Every function that can fail returns a
 * revsum_status; the message of the last failure on the calling thread is
 * available from revsum_last_error(). Strings returned through `char**` out
 * parameters are owned by the caller and released with revsum_string_free().
 */

#ifndef REVSUM_REVSUM_H
#define REVSUM_REVSUM_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define REVSUM_API __declspec(dllexport)
#else
#define REVSUM_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum revsum_status {
  REVSUM_OK = 0,
  REVSUM_ERR_INVALID_ARGUMENT = 1,
  REVSUM_ERR_IO = 2,
  REVSUM_ERR_PARSE = 3,
  REVSUM_ERR_USAGE = 4,
  REVSUM_ERR_TRANSPORT = 5,
  REVSUM_ERR_RATE_LIMITED = 6,
  REVSUM_ERR_CONTEXT_OVERFLOW = 7,
  REVSUM_ERR_NUMERIC = 8,
  REVSUM_ERR_INTERNAL = 9
} revsum_status;

/* Process exit codes used by the command-line tool. */
enum {
  REVSUM_EXIT_OK = 0,
  REVSUM_EXIT_PARTIAL = 1,
  REVSUM_EXIT_USAGE = 2,
  REVSUM_EXIT_FAILURE = 3
};

typedef enum revsum_log_level {
  REVSUM_LOG_DEBUG = 0,
  REVSUM_LOG_INFO = 1,
  REVSUM_LOG_WARN = 2,
  REVSUM_LOG_ERROR = 3
} revsum_log_level;

typedef void (*revsum_log_fn)(revsum_log_level level, const char* message, void* user);

REVSUM_API const char* revsum_version(void);
REVSUM_API const char* revsum_status_name(revsum_status status);
/* Message of the last failure on this thread; empty when none. */
REVSUM_API const char* revsum_last_error(void);
/* Maps a command outcome to an exit code. */
REVSUM_API int revsum_exit_code(revsum_status status, int partial);

/* A NULL callback restores the default stderr sink. */
REVSUM_API void revsum_set_log_callback(revsum_log_fn fn, void* user);
REVSUM_API void revsum_set_log_level(revsum_log_level level);

REVSUM_API void revsum_string_free(char* s);

/* Run configuration. */

typedef struct revsum_config revsum_config;

REVSUM_API revsum_status revsum_config_new(revsum_config** out);
REVSUM_API void revsum_config_free(revsum_config* config);
/* Applies a config file on top of the current settings. */
REVSUM_API revsum_status revsum_config_load_file(revsum_config* config, const char* path);
/* "section.key" = value, e.g. ("run.sample_k", "300"). Relative paths resolve against the working directory. */
REVSUM_API revsum_status revsum_config_set(revsum_config* config, const char* key, const char* value);
REVSUM_API revsum_status revsum_config_add_input(revsum_config* config, const char* app_id, const char* path);
/* Restricts commands to the named app; may be called repeatedly. */
REVSUM_API revsum_status revsum_config_select_app(revsum_config* config, const char* app_id);
REVSUM_API revsum_status revsum_config_validate(const revsum_config* config);
/* Run directory the configuration maps to. */
REVSUM_API revsum_status revsum_config_run_dir(const revsum_config* config, char** out);

/* Commands. */

typedef struct revsum_result revsum_result;

/* command: ingest, sample, summarize, extract, evaluate, study-sheets or report. */
REVSUM_API revsum_status revsum_run_command(const revsum_config* config, const char* command, revsum_result** out);
REVSUM_API revsum_status revsum_cmd_ingest(const revsum_config* config, revsum_result** out);
REVSUM_API revsum_status revsum_cmd_sample(const revsum_config* config, revsum_result** out);
/* prompt may be NULL for the configured prompt. */
REVSUM_API revsum_status revsum_cmd_summarize(const revsum_config* config, const char* prompt, revsum_result** out);
REVSUM_API revsum_status revsum_cmd_extract(const revsum_config* config, revsum_result** out);
REVSUM_API revsum_status revsum_cmd_evaluate(const revsum_config* config, revsum_result** out);
REVSUM_API revsum_status revsum_cmd_study_sheets(const revsum_config* config, revsum_result** out);
REVSUM_API revsum_status revsum_cmd_report(const revsum_config* config, revsum_result** out);

REVSUM_API void revsum_result_free(revsum_result* result);
REVSUM_API int revsum_result_partial(const revsum_result* result);
REVSUM_API const char* revsum_result_run_dir(const revsum_result* result);
REVSUM_API size_t revsum_result_flag_count(const revsum_result* result);
REVSUM_API const char* revsum_result_flag(const revsum_result* result, size_t index);
/* Requests that reached a network transport (0 for mock runs). */
REVSUM_API size_t revsum_result_network_requests(const revsum_result* result);

/* Building blocks. */

typedef struct revsum_stat {
  double statistic;
  double df;
  double p_value;
} revsum_stat;

/* counts is row-major, rows x cols. */
REVSUM_API revsum_status revsum_chi_square(const int64_t* counts, size_t rows, size_t cols, revsum_stat* out);
REVSUM_API revsum_status revsum_paired_t(const double* a, const double* b, size_t n, revsum_stat* out,
                                         double* mean_difference);
REVSUM_API revsum_status revsum_estimate_cost(int64_t input_tokens, int64_t output_tokens, double in_per_million,
                                              double out_per_million, double* cost);
REVSUM_API revsum_status revsum_normalize(const char* text, char** out);

typedef struct revsum_corpus revsum_corpus;

/* Format from the extension; app_id may be NULL. */
REVSUM_API revsum_status revsum_corpus_load(const char* path, const char* app_id, revsum_corpus** out);
REVSUM_API void revsum_corpus_free(revsum_corpus* corpus);
REVSUM_API size_t revsum_corpus_size(const revsum_corpus* corpus);
REVSUM_API const char* revsum_corpus_review_id(const revsum_corpus* corpus, size_t index);
REVSUM_API int revsum_corpus_review_rating(const revsum_corpus* corpus, size_t index);
REVSUM_API const char* revsum_corpus_review_body(const revsum_corpus* corpus, size_t index);

/* Renders template `prompt_id` from `template_dir` (NULL: bundled templates). */
REVSUM_API revsum_status revsum_render_prompt(const char* template_dir, const char* prompt_id, const char* app,
                                              const int* ratings, const char* const* bodies, size_t n, char** out);

#ifdef __cplusplus
}
#endif

#endif /* REVSUM_REVSUM_H */
