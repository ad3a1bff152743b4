/*
 * xlqa C API.
 *
 * Every fallible call returns an xlqa_status. On failure a one-line message is
 * available from xlqa_last_error() on the calling thread until the next call
 * that fails there. Objects are opaque handles released with their *_free
 * function; *_free accepts NULL. Strings are UTF-8 and borrowed unless noted.
 */
#ifndef XLQA_XLQA_H
#define XLQA_XLQA_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#if defined(XLQA_BUILDING_LIBRARY)
#define XLQA_API __declspec(dllexport)
#else
#define XLQA_API __declspec(dllimport)
#endif
#else
#define XLQA_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum xlqa_status {
  XLQA_OK = 0,
  XLQA_ERR_INVALID_ARGUMENT = 1,
  XLQA_ERR_IO = 2,
  XLQA_ERR_PARSE = 3,
  XLQA_ERR_FORMAT = 4,
  XLQA_ERR_DIMENSION_MISMATCH = 5,
  XLQA_ERR_NOT_FOUND = 6,
  XLQA_ERR_DUPLICATE = 7,
  XLQA_ERR_INVARIANT = 8,
  XLQA_ERR_INTERNAL = 9
} xlqa_status;

XLQA_API const char* xlqa_status_name(xlqa_status status);
XLQA_API const char* xlqa_last_error(void);
XLQA_API const char* xlqa_version(void);

/* Receives non-fatal diagnostics from every call. Process-wide; NULL removes. */
typedef void (*xlqa_warning_fn)(const char* message, void* user_data);
XLQA_API void xlqa_set_warning_handler(xlqa_warning_fn fn, void* user_data);

/* Releases strings the library allocated for the caller. */
XLQA_API void xlqa_string_free(char* s);

/* ---- embeddings ------------------------------------------------------- */

typedef struct xlqa_embeddings xlqa_embeddings;

XLQA_API xlqa_status xlqa_embeddings_create(size_t dim, xlqa_embeddings** out);
XLQA_API xlqa_status xlqa_embeddings_load(const char* path, xlqa_embeddings** out);
XLQA_API xlqa_status xlqa_embeddings_save(const xlqa_embeddings* m, const char* path);
XLQA_API xlqa_status xlqa_embeddings_append(xlqa_embeddings* m, const char* id,
                                            const float* vec, size_t dim);
XLQA_API size_t xlqa_embeddings_count(const xlqa_embeddings* m);
XLQA_API size_t xlqa_embeddings_dim(const xlqa_embeddings* m);
/* NULL when row is out of range. */
XLQA_API const char* xlqa_embeddings_id(const xlqa_embeddings* m, size_t row);
XLQA_API const float* xlqa_embeddings_row(const xlqa_embeddings* m, size_t row);
XLQA_API void xlqa_embeddings_free(xlqa_embeddings* m);

/* ---- inner-product index ---------------------------------------------- */

typedef struct xlqa_index xlqa_index;
typedef struct xlqa_hits xlqa_hits;

/* Copies the passage matrix. */
XLQA_API xlqa_status xlqa_index_build(const xlqa_embeddings* passages, xlqa_index** out);
XLQA_API xlqa_status xlqa_index_load(const char* path, xlqa_index** out);
XLQA_API xlqa_status xlqa_index_save(const xlqa_index* index, const char* path);
XLQA_API size_t xlqa_index_size(const xlqa_index* index);
XLQA_API size_t xlqa_index_dim(const xlqa_index* index);
XLQA_API xlqa_status xlqa_index_search(const xlqa_index* index, const float* query, size_t dim,
                                       size_t k, xlqa_hits** out);
/* Searches every query row and writes retrieval records to out_path.
   workers == 0 uses the hardware concurrency. */
XLQA_API xlqa_status xlqa_index_search_to_file(const xlqa_index* index,
                                               const xlqa_embeddings* queries, size_t k,
                                               size_t workers, const char* out_path);
XLQA_API void xlqa_index_free(xlqa_index* index);

XLQA_API size_t xlqa_hits_count(const xlqa_hits* hits);
XLQA_API const char* xlqa_hits_pid(const xlqa_hits* hits, size_t i);
XLQA_API double xlqa_hits_score(const xlqa_hits* hits, size_t i);
XLQA_API size_t xlqa_hits_rank(const xlqa_hits* hits, size_t i);
XLQA_API void xlqa_hits_free(xlqa_hits* hits);

/* ---- metrics ---------------------------------------------------------- */

typedef struct xlqa_tokens xlqa_tokens;

XLQA_API xlqa_status xlqa_tokenize(const char* text, const char* lang, xlqa_tokens** out);
XLQA_API size_t xlqa_tokens_count(const xlqa_tokens* tokens);
XLQA_API const char* xlqa_tokens_at(const xlqa_tokens* tokens, size_t i);
XLQA_API void xlqa_tokens_free(xlqa_tokens* tokens);

XLQA_API xlqa_status xlqa_token_f1(const char* prediction, const char* const* golds,
                                   size_t n_golds, const char* lang, double* out);
XLQA_API xlqa_status xlqa_exact_match(const char* prediction, const char* const* golds,
                                      size_t n_golds, const char* lang, int* out);

typedef struct xlqa_score_summary {
  size_t count;
  double mean_f1;
  double mean_em;
} xlqa_score_summary;

/* Scores answer records against the golds of their questions; writes one
   score record per answer. */
XLQA_API xlqa_status xlqa_eval_score(const char* answers_path, const char* questions_path,
                                     const char* out_path, xlqa_score_summary* summary);

/* ---- pairing ---------------------------------------------------------- */

XLQA_API xlqa_status xlqa_cosine_similarity(const float* u, const float* v, size_t dim,
                                            double* out);
/* degenerate (optional) is set to 1 when either side has no tokens. */
XLQA_API xlqa_status xlqa_sentence_bleu(const char* candidate, const char* reference,
                                        const char* lang, double* score, int* degenerate);
XLQA_API xlqa_status xlqa_pearson_correlation(const double* xs, const double* ys, size_t n,
                                              double* out);

typedef struct xlqa_pair_mine_options {
  const char* questions_path;
  const char* embeddings_path;
  const char* src_lang;
  const char* dst_lang;
  double threshold;
  const char* out_path;
  const char* translations_path; /* optional: dst questions translated into src */
  const char* metrics_path;      /* optional: per-pair cosine/BLEU CSV */
  const char* const* languages;  /* optional: accepted language codes */
  size_t n_languages;
} xlqa_pair_mine_options;

typedef struct xlqa_pair_mine_result {
  size_t pairs;
  int has_correlation;
  double correlation;
} xlqa_pair_mine_result;

XLQA_API void xlqa_pair_mine_options_init(xlqa_pair_mine_options* opts);
XLQA_API xlqa_status xlqa_pair_mine(const xlqa_pair_mine_options* opts,
                                    xlqa_pair_mine_result* result);
/* Validates translation groups; out_path (optional) receives them re-serialized. */
XLQA_API xlqa_status xlqa_pair_ingest(const char* path, const char* out_path, size_t* groups);

/* ---- analysis --------------------------------------------------------- */

typedef struct xlqa_analyze_options {
  const char* mode; /* "oracle" or "non-oracle" */
  const char* passages_path;
  const char* golds_path;
  const char* groups_path;
  const char* retrievals_path;
  const char* answers_path; /* optional */
  const char* labels_path;  /* optional */
  const char* out_dir;
  size_t top_k; /* 0: protocol default (20 oracle, 1000 non-oracle) */
  double epsilon;
  double threshold;
  const char* containment; /* "per_language" or "any_language" */
  const char* gold_policy; /* "as_is" or "group_fallback" */
  const char* const* languages;
  size_t n_languages;
} xlqa_analyze_options;

typedef struct xlqa_report_summary {
  size_t groups;
  size_t selected_groups;
  size_t contexts;
  int has_rates;
  size_t total;
  size_t inconsistent_score;
  double rate_score;
  size_t inconsistent_string;
  double rate_string;
  int has_histogram;
  size_t labels;
} xlqa_report_summary;

XLQA_API void xlqa_analyze_options_init(xlqa_analyze_options* opts);
/* summary_text (optional) receives a copy of summary.txt; free with xlqa_string_free. */
XLQA_API xlqa_status xlqa_analyze(const xlqa_analyze_options* opts, xlqa_report_summary* summary,
                                  char** summary_text);

typedef struct xlqa_pipeline_overrides {
  const char* out_dir; /* NULL keeps the config value */
  const char* mode;
  size_t k;       /* 0 keeps */
  size_t workers; /* 0 keeps */
} xlqa_pipeline_overrides;

XLQA_API void xlqa_pipeline_overrides_init(xlqa_pipeline_overrides* o);
XLQA_API xlqa_status xlqa_run_pipeline(const char* config_path,
                                       const xlqa_pipeline_overrides* overrides,
                                       xlqa_report_summary* summary, char** summary_text);

#ifdef __cplusplus
}
#endif

#endif /* XLQA_XLQA_H */
