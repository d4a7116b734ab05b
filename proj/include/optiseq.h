/* optiseq — inference-time selection of in-context example orderings.
 *
 * C API over the C++ core: opaque handles, status codes, and strings the
 * caller releases with optiseq_string_free(). Thread-safe unless noted;
 * the last-error message is thread-local.
 */
#ifndef OPTISEQ_H
#define OPTISEQ_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

#define OPTISEQ_API_VERSION 1

typedef enum optiseq_status {
    OPTISEQ_OK = 0,
    OPTISEQ_ERR_INVALID_ARGUMENT,
    OPTISEQ_ERR_TEMPLATE,
    OPTISEQ_ERR_INVALID_ORDERING,
    OPTISEQ_ERR_CAP_EXCEEDED,
    OPTISEQ_ERR_PARSE,
    OPTISEQ_ERR_SCHEMA,
    OPTISEQ_ERR_BACKEND_UNAVAILABLE,
    OPTISEQ_ERR_LOGPROBS_UNSUPPORTED,
    OPTISEQ_ERR_TOKEN_BOUNDARY_MISMATCH,
    OPTISEQ_ERR_EMPTY_OUTPUT,
    OPTISEQ_ERR_EMPTY_SEQUENCE,
    OPTISEQ_ERR_EMPTY_GOLD,
    OPTISEQ_ERR_EMPTY_RECORD_SET,
    OPTISEQ_ERR_ALL_GENERATIONS_EMPTY,
    OPTISEQ_ERR_DIMENSION_MISMATCH,
    OPTISEQ_ERR_ZERO_VECTOR,
    OPTISEQ_ERR_IO,
    OPTISEQ_ERR_VERIFY_MISMATCH,
    OPTISEQ_ERR_INTERNAL
} optiseq_status;

/* Library version string, e.g. "0.1.0". Static storage; do not free. */
const char* optiseq_version(void);

/* Stable name for a status value. Static storage; do not free. */
const char* optiseq_status_name(optiseq_status status);

/* Detail message for the most recent failing call on this thread.
 * Static thread-local storage; do not free. */
const char* optiseq_last_error(void);

/* Releases any char* the library handed out. NULL is fine. */
void optiseq_string_free(char* s);

/* ---- metrics ------------------------------------------------------- */

/* Scores a predicted API sequence against a gold one. Inputs are raw
 * texts; the first "<<...>>" span (or the whole text) is parsed as a
 * comma-separated name list. Percentages are full precision. */
optiseq_status optiseq_score_sequences(const char* pred_text, const char* gold_text,
                                       double* precision, double* recall,
                                       double* accuracy);

/* ---- ordering plans ------------------------------------------------ */

/* All n! (or, when anchor_ranked is non-NULL, (n-1)! anchored)
 * orderings as a JSON array of index arrays. anchor_ranked, when given,
 * must be a permutation of 0..n-1 sorted by descending preference; its
 * first entry is pinned first in every ordering. */
optiseq_status optiseq_orderings_json(size_t n, const size_t* anchor_ranked,
                                      uint64_t permutation_cap, char** json_out);

/* ---- backends ------------------------------------------------------ */

typedef struct optiseq_backend optiseq_backend;

/* Deterministic byte-bigram reference model trained on a corpus file. */
optiseq_status optiseq_backend_open_ngram(const char* corpus_path,
                                          optiseq_backend** out);

typedef struct optiseq_http_options {
    const char* base_url;   /* e.g. "http://localhost:8080/v1" */
    const char* model;
    const char* api_key;    /* NULL -> OPTISEQ_API_KEY environment variable */
    int timeout_ms;         /* <=0 -> 30000 */
    int max_parallel;       /* in-flight request limit; <=0 -> 4 */
} optiseq_http_options;

/* OpenAI-compatible completions endpoint with token logprobs. */
optiseq_status optiseq_backend_open_http(const optiseq_http_options* options,
                                         optiseq_backend** out);

void optiseq_backend_close(optiseq_backend* backend);

/* Greedy continuation; *text_out is the emitted text and *total_logprob
 * the sum of its per-token log-probabilities (nats). stops may be NULL. */
optiseq_status optiseq_backend_generate(optiseq_backend* backend, const char* prompt,
                                        int max_tokens, const char* const* stops,
                                        size_t n_stops, char** text_out,
                                        double* total_logprob);

/* Log-probability (nats) of continuation's tokens given prefix. */
optiseq_status optiseq_backend_score(optiseq_backend* backend, const char* prefix,
                                     const char* continuation, double* total_logprob);

/* ---- experiment runs ----------------------------------------------- */

typedef struct optiseq_run_options {
    const char* dataset_path;    /* JSON-lines task file */
    const char* template_path;   /* prompt template JSON */
    const char* methods;         /* comma-separated; "all" expands to all six */
    int shots;                   /* <=0 -> 3 */
    const char* backend;         /* "ngram" | "http" */
    const char* corpus_path;     /* ngram backend */
    const char* base_url;        /* http backend */
    const char* model;           /* http backend */
    int timeout_ms;              /* <=0 -> 30000 */
    const char* embed;           /* "trigram" (default) | "http" */
    const char* embed_base_url;
    const char* embed_model;
    uint64_t seed;
    int parallel;                /* <=0 -> 1 */
    uint64_t permutation_cap;    /* 0 -> 720 */
    int max_tokens;              /* <=0 -> 64 */
    const char* stop;            /* generation stop sequence; NULL -> "\n" */
    const char* out_path;        /* report file; NULL -> not written */
} optiseq_run_options;

/* Runs every task x method cell and returns the full report JSON
 * (config echo, per-method summary, per-record results). */
optiseq_status optiseq_run(const optiseq_run_options* options, char** report_json_out);

/* Re-reads a report, recomputes its aggregates and (ngram runs) the
 * example-free logprobs, and checks equality. *details_out is filled on
 * success and on mismatch. */
optiseq_status optiseq_verify(const char* report_path, char** details_out);

/* Renders a report's per-method summary as a fixed-width text table. */
optiseq_status optiseq_render_table(const char* report_json, char** table_out);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* OPTISEQ_H */
