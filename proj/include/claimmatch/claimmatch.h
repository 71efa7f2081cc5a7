/*
 * C interface to the claimmatch engine.
 *
 * Objects are opaque handles created by cm_*_new / cm_*_load / cm_*_build
 * and released with the matching cm_*_free. Every fallible call returns a
 * cm_status; on failure cm_last_error() describes the problem (the message
 * is thread-local and valid until the next call on the same thread).
 * Strings returned through char** outputs are heap-allocated and must be
 * released with cm_string_free.
 */
#ifndef CLAIMMATCH_H
#define CLAIMMATCH_H

#include <stddef.h>
#include <stdint.h>

#if defined(CLAIMMATCH_BUILDING_LIBRARY)
#define CM_API __attribute__((visibility("default")))
#else
#define CM_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum cm_status {
    CM_OK = 0,
    CM_ERR_USAGE = 1,    /* invalid argument or configuration */
    CM_ERR_DATA = 2,     /* malformed input data or I/O failure */
    CM_ERR_PROVIDER = 3, /* embedding / translation provider failure */
    CM_ERR_INTERNAL = 4
} cm_status;

typedef struct cm_corpus cm_corpus;
typedef struct cm_embedder cm_embedder;
typedef struct cm_translator cm_translator;
typedef struct cm_bm25 cm_bm25;
typedef struct cm_store cm_store;

CM_API const char* cm_version(void);
CM_API const char* cm_last_error(void);
CM_API void cm_string_free(char* s);

/* Receives warnings (truncation, ignored fields, ...). NULL restores the
 * default stderr sink. */
typedef void (*cm_warning_fn)(const char* message, void* user);
CM_API void cm_set_warning_callback(cm_warning_fn fn, void* user);

/* ---- corpus ---------------------------------------------------------- */

CM_API cm_status cm_corpus_load(const char* path, cm_corpus** out);
CM_API cm_status cm_corpus_parse(const char* jsonl, size_t len, cm_corpus** out);
CM_API void cm_corpus_free(cm_corpus* corpus);
/* Writes the corpus back as JSONL. */
CM_API cm_status cm_corpus_write(const cm_corpus* corpus, const char* path);
/* Validation report as aligned text (as_json = 0) or JSON. */
CM_API cm_status cm_corpus_validate(const cm_corpus* corpus, int as_json, char** out_report);
/* JSON array of partition tags, e.g. ["en-en","hi-en"]. */
CM_API cm_status cm_corpus_partitions(const cm_corpus* corpus, char** out_json);
CM_API cm_status cm_corpus_write_qrels(const cm_corpus* corpus, const char* partition, const char* path);

/* ---- providers ------------------------------------------------------- */

CM_API cm_status cm_embedder_new_hashed(size_t dim, size_t max_tokens, cm_embedder** out);
/* dim = 0 discovers the dimension with a probe request. */
CM_API cm_status cm_embedder_new_http(const char* base_url, const char* model, size_t dim, size_t max_tokens,
                                      cm_embedder** out);
CM_API void cm_embedder_free(cm_embedder* embedder);
CM_API cm_status cm_embedder_dim(const cm_embedder* embedder, size_t* out_dim);
/* Writes n * dim floats, row-major, into out (capacity out_len floats). */
CM_API cm_status cm_embedder_embed(const cm_embedder* embedder, const char* const* texts, size_t n, float* out,
                                   size_t out_len);

/* table_json: JSON object of word -> translation. pairs: comma-separated
 * partition tags such as "hi-en" (NULL = "hi-en"). */
CM_API cm_status cm_translator_new_stub(const char* table_json, const char* pairs, cm_translator** out);
/* pairs NULL or empty = forward every pair. */
CM_API cm_status cm_translator_new_http(const char* base_url, const char* pairs, cm_translator** out);
CM_API void cm_translator_free(cm_translator* translator);
CM_API cm_status cm_translator_translate(const cm_translator* translator, const char* text, const char* src,
                                         const char* dst, char** out);

/* ---- indexes --------------------------------------------------------- */

typedef struct cm_index_options {
    const char* partition;   /* NULL = every article in the corpus */
    const char* granularity; /* "article" or "paragraph" (BM25 only) */
    double k1;
    double b;
    size_t token_limit;
    int include_title;
} cm_index_options;

CM_API cm_index_options cm_index_options_default(void);

CM_API cm_status cm_bm25_build(const cm_corpus* corpus, const cm_index_options* options, cm_bm25** out);
CM_API cm_status cm_bm25_save(const cm_bm25* index, const char* path);
CM_API cm_status cm_bm25_load(const char* path, cm_bm25** out);
CM_API void cm_bm25_free(cm_bm25* index);
/* {"granularity":..,"units":..,"avg_dl":..,"terms":..,"k1":..,"b":..} */
CM_API cm_status cm_bm25_info(const cm_bm25* index, char** out_json);
/* Top-k articles as TREC run lines. */
CM_API cm_status cm_bm25_search(const cm_bm25* index, const char* query_id, const char* query_text, size_t k,
                                const char* system, char** out_run);

CM_API cm_status cm_store_build(const cm_corpus* corpus, const cm_embedder* embedder,
                                const cm_index_options* options, cm_store** out);
CM_API cm_status cm_store_save(const cm_store* store, const char* path);
CM_API cm_status cm_store_load(const char* path, cm_store** out);
CM_API void cm_store_free(cm_store* store);
/* {"provider":..,"dim":..,"chunks":..} */
CM_API cm_status cm_store_info(const cm_store* store, char** out_json);
/* pooling: "max" (NULL), "sum" or "mean". */
CM_API cm_status cm_store_search(const cm_store* store, const cm_embedder* embedder, const char* query_id,
                                 const char* query_text, size_t k, const char* system, const char* pooling,
                                 char** out_run);

/* Runs every tweet of a partition as a query. BM25 queries on a
 * cross-lingual partition are translated first (translator required).
 * out_query_log receives "query_id<TAB>query text" lines. */
CM_API cm_status cm_bm25_search_partition(const cm_bm25* index, const cm_corpus* corpus, const char* partition,
                                          const cm_translator* translator, size_t k, const char* system,
                                          char** out_run, char** out_query_log);
CM_API cm_status cm_store_search_partition(const cm_store* store, const cm_embedder* embedder,
                                           const cm_corpus* corpus, const char* partition, size_t k,
                                           const char* system, const char* pooling, char** out_run,
                                           char** out_query_log);

/* ---- mining ---------------------------------------------------------- */

typedef struct cm_mining_options {
    const char* partition; /* NULL = every partition, concatenated */
    const char* strategy;  /* "random" or "hard" */
    double ceiling;
    size_t negatives_per_positive;
    uint64_t seed;
    int include_title;
} cm_mining_options;

CM_API cm_mining_options cm_mining_options_default(void);

/* Mines negatives, assembles the labeled dataset (positives included) and
 * writes it as JSONL pair records to out_path. embedder may be NULL for
 * random mining. out_summary receives a JSON object with label counts. */
CM_API cm_status cm_mine(const cm_corpus* corpus, const cm_embedder* embedder, const cm_mining_options* options,
                         const char* out_path, char** out_summary);

/* ---- evaluation ------------------------------------------------------ */

/* ks may be NULL (defaults 1,5,10,20,50). system selects one system from a
 * multi-system run file (NULL = the only one). */
CM_API cm_status cm_eval_retrieval(const char* run_path, const char* qrels_path, const size_t* ks, size_t n_ks,
                                   const char* system, char** out_json, char** out_text);

typedef struct cm_match_options {
    size_t folds;
    uint64_t seed;
    double threshold;
    int calibrate;
    const char* split; /* "stratified" or "group" */
    int include_title;
} cm_match_options;

CM_API cm_match_options cm_match_options_default(void);

CM_API cm_status cm_eval_match(const cm_corpus* corpus, const char* dataset_path, const cm_embedder* embedder,
                               const cm_match_options* options, char** out_json, char** out_text);

/* ---- experiments ----------------------------------------------------- */

/* Runs the experiment described by a JSON config file; out_summary gets
 * the text reports and the list of written files. */
CM_API cm_status cm_experiment_run(const char* config_path, char** out_summary);

#ifdef __cplusplus
}
#endif

#endif /* CLAIMMATCH_H */
