#include "xlqa/xlqa.h"

#include <cmath>
#include <cstdlib>
#include <cstring>
#include <mutex>
#include <set>
#include <new>
#include <sstream>

#include "jsonl.hpp"
#include "xlqa/consistency.hpp"
#include "xlqa/embeddings.hpp"
#include "xlqa/error.hpp"
#include "xlqa/index.hpp"
#include "xlqa/metrics.hpp"
#include "xlqa/pairing.hpp"
#include "xlqa/records.hpp"
#include "xlqa/report.hpp"

struct xlqa_embeddings {
  xlqa::EmbeddingMatrix matrix;
};

struct xlqa_index {
  xlqa::FlatIpIndex index;
};

struct xlqa_hits {
  std::vector<xlqa::Hit> hits;
};

struct xlqa_tokens {
  std::vector<std::string> tokens;
};

namespace {

thread_local std::string g_last_error;

std::mutex g_warning_mutex;
xlqa_warning_fn g_warning_fn = nullptr;
void* g_warning_user = nullptr;

void emit_warning(const std::string& msg) {
  std::lock_guard lock(g_warning_mutex);
  if (g_warning_fn) g_warning_fn(msg.c_str(), g_warning_user);
}

const xlqa::WarningSink kWarn = emit_warning;

xlqa_status to_status(xlqa::ErrorCode code) {
  using xlqa::ErrorCode;
  switch (code) {
    case ErrorCode::invalid_argument: return XLQA_ERR_INVALID_ARGUMENT;
    case ErrorCode::io: return XLQA_ERR_IO;
    case ErrorCode::parse: return XLQA_ERR_PARSE;
    case ErrorCode::format: return XLQA_ERR_FORMAT;
    case ErrorCode::dimension_mismatch: return XLQA_ERR_DIMENSION_MISMATCH;
    case ErrorCode::not_found: return XLQA_ERR_NOT_FOUND;
    case ErrorCode::duplicate: return XLQA_ERR_DUPLICATE;
    case ErrorCode::invariant: return XLQA_ERR_INVARIANT;
    case ErrorCode::internal: return XLQA_ERR_INTERNAL;
  }
  return XLQA_ERR_INTERNAL;
}

xlqa_status fail(xlqa_status status, std::string message) {
  // Keep the message on one line.
  for (char& c : message) {
    if (c == '\n' || c == '\r') c = ' ';
  }
  g_last_error = std::move(message);
  return status;
}

template <class Fn>
xlqa_status guarded(Fn&& fn) noexcept {
  try {
    fn();
    return XLQA_OK;
  } catch (const xlqa::Error& e) {
    return fail(to_status(e.code()), e.what());
  } catch (const std::bad_alloc&) {
    return fail(XLQA_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(XLQA_ERR_INTERNAL, e.what());
  } catch (...) {
    return fail(XLQA_ERR_INTERNAL, "unknown failure");
  }
}

void require(bool ok, const char* what) {
  if (!ok) throw xlqa::Error(xlqa::ErrorCode::invalid_argument, what);
}

xlqa::LanguageCode language(const char* code) {
  require(code != nullptr, "language code is NULL");
  return xlqa::LanguageCode::parse(code);
}

std::vector<std::string> string_list(const char* const* items, size_t n, const char* what) {
  require(n == 0 || items != nullptr, what);
  std::vector<std::string> out;
  out.reserve(n);
  for (size_t i = 0; i < n; ++i) {
    require(items[i] != nullptr, what);
    out.emplace_back(items[i]);
  }
  return out;
}

xlqa::LanguageSet language_set(const char* const* codes, size_t n) {
  if (n == 0) return xlqa::LanguageSet::analysis_default();
  std::set<xlqa::LanguageCode> set;
  for (const auto& c : string_list(codes, n, "language list contains NULL")) {
    set.insert(xlqa::LanguageCode::parse(c));
  }
  return xlqa::LanguageSet(std::move(set));
}

char* copy_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

void fill_summary(const xlqa::PipelineReport& r, xlqa_report_summary* s) {
  if (!s) return;
  *s = xlqa_report_summary{};
  s->groups = r.groups;
  s->selected_groups = r.selected_groups;
  s->contexts = r.contexts;
  if (r.score_rate && r.string_rate) {
    s->has_rates = 1;
    s->total = r.score_rate->total;
    s->inconsistent_score = r.score_rate->count_inconsistent;
    s->rate_score = r.score_rate->rate;
    s->inconsistent_string = r.string_rate->count_inconsistent;
    s->rate_string = r.string_rate->rate;
  }
  if (r.histogram) {
    s->has_histogram = 1;
    s->labels = r.histogram->total();
  }
}

}  // namespace

extern "C" {

const char* xlqa_status_name(xlqa_status status) {
  switch (status) {
    case XLQA_OK: return "ok";
    case XLQA_ERR_INVALID_ARGUMENT: return "invalid_argument";
    case XLQA_ERR_IO: return "io_error";
    case XLQA_ERR_PARSE: return "parse_error";
    case XLQA_ERR_FORMAT: return "format_error";
    case XLQA_ERR_DIMENSION_MISMATCH: return "dimension_mismatch";
    case XLQA_ERR_NOT_FOUND: return "not_found";
    case XLQA_ERR_DUPLICATE: return "duplicate";
    case XLQA_ERR_INVARIANT: return "invariant_violation";
    case XLQA_ERR_INTERNAL: return "internal_error";
  }
  return "unknown";
}

const char* xlqa_last_error(void) { return g_last_error.c_str(); }

const char* xlqa_version(void) { return "1.0.0"; }

void xlqa_set_warning_handler(xlqa_warning_fn fn, void* user_data) {
  std::lock_guard lock(g_warning_mutex);
  g_warning_fn = fn;
  g_warning_user = user_data;
}

void xlqa_string_free(char* s) { std::free(s); }

// ---- embeddings ----------------------------------------------------------

xlqa_status xlqa_embeddings_create(size_t dim, xlqa_embeddings** out) {
  return guarded([&] {
    require(out != nullptr, "out is NULL");
    *out = new xlqa_embeddings{xlqa::EmbeddingMatrix(dim)};
  });
}

xlqa_status xlqa_embeddings_load(const char* path, xlqa_embeddings** out) {
  return guarded([&] {
    require(path != nullptr && out != nullptr, "path or out is NULL");
    *out = new xlqa_embeddings{xlqa::load_embeddings(path)};
  });
}

xlqa_status xlqa_embeddings_save(const xlqa_embeddings* m, const char* path) {
  return guarded([&] {
    require(m != nullptr && path != nullptr, "matrix or path is NULL");
    xlqa::write_embeddings(path, m->matrix);
  });
}

xlqa_status xlqa_embeddings_append(xlqa_embeddings* m, const char* id, const float* vec,
                                   size_t dim) {
  return guarded([&] {
    require(m != nullptr && id != nullptr && (vec != nullptr || dim == 0),
            "matrix, id or vector is NULL");
    m->matrix.add_row(id, std::span<const float>(vec, dim));
  });
}

size_t xlqa_embeddings_count(const xlqa_embeddings* m) { return m ? m->matrix.size() : 0; }

size_t xlqa_embeddings_dim(const xlqa_embeddings* m) { return m ? m->matrix.dim() : 0; }

const char* xlqa_embeddings_id(const xlqa_embeddings* m, size_t row) {
  if (!m || row >= m->matrix.size()) return nullptr;
  return m->matrix.id(row).c_str();
}

const float* xlqa_embeddings_row(const xlqa_embeddings* m, size_t row) {
  if (!m || row >= m->matrix.size()) return nullptr;
  return m->matrix.row(row).data();
}

void xlqa_embeddings_free(xlqa_embeddings* m) { delete m; }

// ---- index -----------------------------------------------------------------

xlqa_status xlqa_index_build(const xlqa_embeddings* passages, xlqa_index** out) {
  return guarded([&] {
    require(passages != nullptr && out != nullptr, "passages or out is NULL");
    *out = new xlqa_index{xlqa::FlatIpIndex::build(passages->matrix)};
  });
}

xlqa_status xlqa_index_load(const char* path, xlqa_index** out) {
  return guarded([&] {
    require(path != nullptr && out != nullptr, "path or out is NULL");
    *out = new xlqa_index{xlqa::FlatIpIndex::load(path)};
  });
}

xlqa_status xlqa_index_save(const xlqa_index* index, const char* path) {
  return guarded([&] {
    require(index != nullptr && path != nullptr, "index or path is NULL");
    index->index.save(path);
  });
}

size_t xlqa_index_size(const xlqa_index* index) { return index ? index->index.size() : 0; }

size_t xlqa_index_dim(const xlqa_index* index) { return index ? index->index.dim() : 0; }

xlqa_status xlqa_index_search(const xlqa_index* index, const float* query, size_t dim, size_t k,
                              xlqa_hits** out) {
  return guarded([&] {
    require(index != nullptr && out != nullptr && (query != nullptr || dim == 0),
            "index, query or out is NULL");
    *out = new xlqa_hits{index->index.search_topk(std::span<const float>(query, dim), k)};
  });
}

xlqa_status xlqa_index_search_to_file(const xlqa_index* index, const xlqa_embeddings* queries,
                                      size_t k, size_t workers, const char* out_path) {
  return guarded([&] {
    require(index != nullptr && queries != nullptr && out_path != nullptr,
            "index, queries or out_path is NULL");
    const auto results = index->index.batch_search(queries->matrix, k, workers);
    auto out = xlqa::detail::open_output(out_path, std::ios::out | std::ios::binary);
    xlqa::write_retrievals(out, results);
  });
}

void xlqa_index_free(xlqa_index* index) { delete index; }

size_t xlqa_hits_count(const xlqa_hits* hits) { return hits ? hits->hits.size() : 0; }

const char* xlqa_hits_pid(const xlqa_hits* hits, size_t i) {
  if (!hits || i >= hits->hits.size()) return nullptr;
  return hits->hits[i].pid.c_str();
}

double xlqa_hits_score(const xlqa_hits* hits, size_t i) {
  if (!hits || i >= hits->hits.size()) return std::nan("");
  return hits->hits[i].score;
}

size_t xlqa_hits_rank(const xlqa_hits* hits, size_t i) {
  if (!hits || i >= hits->hits.size()) return 0;
  return hits->hits[i].rank;
}

void xlqa_hits_free(xlqa_hits* hits) { delete hits; }

// ---- metrics -----------------------------------------------------------------

xlqa_status xlqa_tokenize(const char* text, const char* lang, xlqa_tokens** out) {
  return guarded([&] {
    require(text != nullptr && out != nullptr, "text or out is NULL");
    *out = new xlqa_tokens{xlqa::normalize_and_tokenize(text, language(lang))};
  });
}

size_t xlqa_tokens_count(const xlqa_tokens* tokens) { return tokens ? tokens->tokens.size() : 0; }

const char* xlqa_tokens_at(const xlqa_tokens* tokens, size_t i) {
  if (!tokens || i >= tokens->tokens.size()) return nullptr;
  return tokens->tokens[i].c_str();
}

void xlqa_tokens_free(xlqa_tokens* tokens) { delete tokens; }

xlqa_status xlqa_token_f1(const char* prediction, const char* const* golds, size_t n_golds,
                          const char* lang, double* out) {
  return guarded([&] {
    require(prediction != nullptr && out != nullptr, "prediction or out is NULL");
    const auto gs = string_list(golds, n_golds, "gold list contains NULL");
    *out = xlqa::token_f1(prediction, gs, language(lang));
  });
}

xlqa_status xlqa_exact_match(const char* prediction, const char* const* golds, size_t n_golds,
                             const char* lang, int* out) {
  return guarded([&] {
    require(prediction != nullptr && out != nullptr, "prediction or out is NULL");
    const auto gs = string_list(golds, n_golds, "gold list contains NULL");
    *out = xlqa::exact_match(prediction, gs, language(lang));
  });
}

xlqa_status xlqa_eval_score(const char* answers_path, const char* questions_path,
                            const char* out_path, xlqa_score_summary* summary) {
  return guarded([&] {
    require(answers_path && questions_path && out_path, "path is NULL");
    const xlqa::IngestOptions opts;
    const auto answers = xlqa::load_answers(answers_path, opts);
    const auto questions = xlqa::load_questions(questions_path, opts);
    const auto scores = xlqa::score_answers(answers, questions);
    const auto s = xlqa::summarize_scores(scores);
    auto out = xlqa::detail::open_output(out_path, std::ios::out | std::ios::binary);
    xlqa::write_scores(out, scores);
    if (summary) *summary = xlqa_score_summary{s.count, s.mean_f1, s.mean_em};
  });
}

// ---- pairing -------------------------------------------------------------------

xlqa_status xlqa_cosine_similarity(const float* u, const float* v, size_t dim, double* out) {
  return guarded([&] {
    require(u != nullptr && v != nullptr && out != nullptr, "vector or out is NULL");
    *out = xlqa::cosine_similarity(std::span<const float>(u, dim), std::span<const float>(v, dim));
  });
}

xlqa_status xlqa_sentence_bleu(const char* candidate, const char* reference, const char* lang,
                               double* score, int* degenerate) {
  return guarded([&] {
    require(candidate && reference && score, "candidate, reference or score is NULL");
    const auto b = xlqa::sentence_bleu(candidate, reference, language(lang));
    *score = b.value;
    if (degenerate) *degenerate = b.degenerate ? 1 : 0;
    if (b.degenerate) emit_warning("BLEU of an empty candidate or reference is 0");
  });
}

xlqa_status xlqa_pearson_correlation(const double* xs, const double* ys, size_t n, double* out) {
  return guarded([&] {
    require((xs && ys) || n == 0, "sample is NULL");
    require(out != nullptr, "out is NULL");
    *out = xlqa::pearson_correlation(std::span<const double>(xs, n), std::span<const double>(ys, n));
  });
}

void xlqa_pair_mine_options_init(xlqa_pair_mine_options* opts) {
  if (!opts) return;
  *opts = xlqa_pair_mine_options{};
  opts->threshold = xlqa::kDefaultPairThreshold;
}

xlqa_status xlqa_pair_mine(const xlqa_pair_mine_options* opts, xlqa_pair_mine_result* result) {
  return guarded([&] {
    require(opts != nullptr, "options are NULL");
    require(opts->questions_path && opts->embeddings_path && opts->out_path,
            "questions_path, embeddings_path and out_path are required");
    xlqa::IngestOptions ingest;
    ingest.languages = language_set(opts->languages, opts->n_languages);
    const auto questions = xlqa::load_questions(opts->questions_path, ingest);
    const auto embeddings = xlqa::load_embeddings(opts->embeddings_path);
    const auto src = xlqa::select_language(questions, language(opts->src_lang));
    const auto dst = xlqa::select_language(questions, language(opts->dst_lang));
    const auto groups = xlqa::mine_pairs({&src, &embeddings}, {&dst, &embeddings}, opts->threshold);
    {
      auto out = xlqa::detail::open_output(opts->out_path);
      xlqa::write_groups(out, groups);
    }
    xlqa_pair_mine_result r{groups.size(), 0, 0.0};
    if (opts->translations_path) {
      const auto translations = xlqa::load_questions(opts->translations_path, ingest);
      const auto metrics = xlqa::pair_metrics(groups, questions, translations);
      if (opts->metrics_path) {
        auto out = xlqa::detail::open_output(opts->metrics_path);
        xlqa::write_pair_metrics(out, metrics);
      }
      if (auto corr = xlqa::cosine_bleu_correlation(metrics)) {
        r.has_correlation = 1;
        r.correlation = *corr;
      } else {
        emit_warning("cosine/BLEU correlation undefined (fewer than 2 pairs or zero variance)");
      }
    }
    if (result) *result = r;
  });
}

xlqa_status xlqa_pair_ingest(const char* path, const char* out_path, size_t* groups) {
  return guarded([&] {
    require(path != nullptr, "path is NULL");
    const auto g = xlqa::ingest_translation_pairs(std::filesystem::path(path));
    if (out_path) {
      auto out = xlqa::detail::open_output(out_path);
      xlqa::write_groups(out, g);
    }
    if (groups) *groups = g.size();
  });
}

// ---- analysis ------------------------------------------------------------------

void xlqa_analyze_options_init(xlqa_analyze_options* opts) {
  if (!opts) return;
  *opts = xlqa_analyze_options{};
  opts->mode = "oracle";
  opts->epsilon = xlqa::kDefaultEpsilon;
  opts->threshold = xlqa::kDefaultPairThreshold;
  opts->containment = "per_language";
  opts->gold_policy = "as_is";
}

xlqa_status xlqa_analyze(const xlqa_analyze_options* opts, xlqa_report_summary* summary,
                         char** summary_text) {
  return guarded([&] {
    require(opts != nullptr, "options are NULL");
    require(opts->passages_path && opts->golds_path && opts->groups_path &&
                opts->retrievals_path && opts->out_dir,
            "passages, golds, groups, retrievals and out_dir are required");
    xlqa::AnalysisConfig c;
    c.passages = opts->passages_path;
    c.golds = opts->golds_path;
    c.groups = opts->groups_path;
    c.retrievals = opts->retrievals_path;
    if (opts->answers_path) c.answers = opts->answers_path;
    if (opts->labels_path) c.labels = opts->labels_path;
    c.out_dir = opts->out_dir;
    c.mode = xlqa::parse_selection_mode(opts->mode ? opts->mode : "oracle");
    if (opts->top_k > 0) c.top_k = opts->top_k;
    c.epsilon = opts->epsilon;
    c.threshold = opts->threshold;
    if (opts->containment) c.containment = xlqa::parse_containment(opts->containment);
    if (opts->gold_policy) c.gold_policy = xlqa::parse_gold_policy(opts->gold_policy);
    c.languages = language_set(opts->languages, opts->n_languages);
    const auto report = xlqa::run_analysis(c, kWarn);
    fill_summary(report, summary);
    if (summary_text) *summary_text = copy_string(report.summary);
  });
}

void xlqa_pipeline_overrides_init(xlqa_pipeline_overrides* o) {
  if (o) *o = xlqa_pipeline_overrides{};
}

xlqa_status xlqa_run_pipeline(const char* config_path, const xlqa_pipeline_overrides* overrides,
                              xlqa_report_summary* summary, char** summary_text) {
  return guarded([&] {
    require(config_path != nullptr, "config_path is NULL");
    auto config = xlqa::load_pipeline_config(config_path);
    if (overrides) {
      if (overrides->out_dir) config.out_dir = overrides->out_dir;
      if (overrides->mode) config.mode = xlqa::parse_selection_mode(overrides->mode);
      if (overrides->k > 0) config.k = overrides->k;
      if (overrides->workers > 0) config.workers = overrides->workers;
    }
    const auto report = xlqa::run_pipeline(config, kWarn);
    fill_summary(report, summary);
    if (summary_text) *summary_text = copy_string(report.summary);
  });
}

}  // extern "C"
