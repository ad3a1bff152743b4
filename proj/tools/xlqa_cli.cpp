// Command-line front end. Talks to the library only through the C API.

#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "xlqa/xlqa.h"

namespace {

using nlohmann::json;

struct Failure {
  xlqa_status status;
};

void check(xlqa_status s) {
  if (s != XLQA_OK) throw Failure{s};
}

void print_json(const json& j) { std::cout << j.dump(-1, ' ', false, json::error_handler_t::replace) << '\n'; }

void print_warning(const char* message, void*) {
  std::cerr << json{{"warning", message}}.dump(-1, ' ', false, json::error_handler_t::replace) << '\n';
}

// Holds a library-owned handle and frees it on scope exit.
template <class T, void (*Free)(T*)>
class Handle {
 public:
  Handle() = default;
  Handle(const Handle&) = delete;
  Handle& operator=(const Handle&) = delete;
  ~Handle() { Free(ptr_); }

  T** out() { return &ptr_; }
  T* get() const { return ptr_; }

 private:
  T* ptr_ = nullptr;
};

using Embeddings = Handle<xlqa_embeddings, xlqa_embeddings_free>;
using Index = Handle<xlqa_index, xlqa_index_free>;

class OwnedString {
 public:
  ~OwnedString() { xlqa_string_free(ptr_); }
  char** out() { return &ptr_; }
  std::string str() const { return ptr_ ? ptr_ : ""; }

 private:
  char* ptr_ = nullptr;
};

json summary_json(const xlqa_report_summary& s) {
  json j{{"groups", s.groups}, {"selected_groups", s.selected_groups}, {"contexts", s.contexts}};
  if (s.has_rates) {
    j["total"] = s.total;
    j["inconsistent_score"] = s.inconsistent_score;
    j["rate_score"] = s.rate_score;
    j["inconsistent_string"] = s.inconsistent_string;
    j["rate_string"] = s.rate_string;
  }
  if (s.has_histogram) j["labels"] = s.labels;
  return j;
}

const char* opt(const std::string& s) { return s.empty() ? nullptr : s.c_str(); }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Cross-lingual QA consistency toolkit"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(xlqa_version()));

  // index
  auto* index_cmd = app.add_subcommand("index", "Build or query an exact inner-product index");
  index_cmd->require_subcommand(1);

  std::string emb_path, index_out;
  auto* index_build = index_cmd->add_subcommand("build", "Build an index from passage embeddings");
  index_build->add_option("--embeddings", emb_path, "Passage embedding file")->required();
  index_build->add_option("--out", index_out, "Index file to write")->required();

  std::string index_path, queries_path, search_out;
  std::size_t k = 0;
  std::size_t workers = 1;
  auto* index_search = index_cmd->add_subcommand("search", "Top-k search for every query row");
  index_search->add_option("--index", index_path, "Index file")->required();
  index_search->add_option("--queries", queries_path, "Query embedding file")->required();
  index_search->add_option("--k", k, "Hits per query")->required()->check(CLI::PositiveNumber);
  index_search->add_option("--out", search_out, "Retrieval records to write")->required();
  index_search->add_option("--workers", workers, "Worker threads (0 = all cores)");

  // pair
  auto* pair_cmd = app.add_subcommand("pair", "Build question groups");
  pair_cmd->require_subcommand(1);

  xlqa_pair_mine_options mine{};
  xlqa_pair_mine_options_init(&mine);
  std::string mine_questions, mine_embeddings, mine_src, mine_dst, mine_out, mine_translations,
      mine_metrics;
  std::vector<std::string> mine_languages;
  auto* pair_mine = pair_cmd->add_subcommand("mine", "Mine cross-language pairs by cosine");
  pair_mine->add_option("--questions", mine_questions, "Question records")->required();
  pair_mine->add_option("--embeddings", mine_embeddings, "Question embedding file")->required();
  pair_mine->add_option("--src", mine_src, "Source language")->required();
  pair_mine->add_option("--dst", mine_dst, "Target language")->required();
  pair_mine->add_option("--threshold", mine.threshold, "Keep pairs with cosine strictly above")
      ->capture_default_str();
  pair_mine->add_option("--out", mine_out, "Group records to write")->required();
  pair_mine->add_option("--translations", mine_translations,
                        "dst questions translated into the src language (question records)");
  pair_mine->add_option("--metrics-out", mine_metrics, "Per-pair cosine/BLEU CSV");
  pair_mine->add_option("--languages", mine_languages, "Accepted language codes");

  std::string ingest_file, ingest_out;
  auto* pair_ingest = pair_cmd->add_subcommand("ingest", "Validate translation groups");
  pair_ingest->add_option("--file", ingest_file, "Group records")->required();
  pair_ingest->add_option("--out", ingest_out, "Re-serialized groups");

  // eval
  auto* eval_cmd = app.add_subcommand("eval", "Answer scoring");
  eval_cmd->require_subcommand(1);
  std::string eval_answers, eval_questions, eval_out;
  auto* eval_score = eval_cmd->add_subcommand("score", "Token F1 and exact match per answer");
  eval_score->add_option("--answers", eval_answers, "Answer records")->required();
  eval_score->add_option("--questions", eval_questions, "Question records with golds")->required();
  eval_score->add_option("--out", eval_out, "Score records to write")->required();

  // analyze
  auto* analyze_cmd = app.add_subcommand("analyze", "Consistency analysis over retrievals");
  analyze_cmd->require_subcommand(1);
  xlqa_analyze_options an{};
  xlqa_analyze_options_init(&an);
  std::string an_passages, an_golds, an_groups, an_retrievals, an_answers, an_labels, an_out,
      an_containment = "per_language", an_gold_policy = "as_is";
  std::vector<std::string> an_languages;
  std::string an_mode;
  for (const char* mode : {"oracle", "non-oracle"}) {
    auto* sub = analyze_cmd->add_subcommand(mode, std::string(mode) + " protocol");
    sub->add_option("--passages", an_passages, "Passage records")->required();
    sub->add_option("--golds", an_golds, "Question records carrying gold answers")->required();
    sub->add_option("--groups", an_groups, "Group records")->required();
    sub->add_option("--retrievals", an_retrievals, "Retrieval records")->required();
    sub->add_option("--answers", an_answers, "Answer records");
    sub->add_option("--labels", an_labels, "Error label records");
    sub->add_option("--out", an_out, "Output directory")->required();
    sub->add_option("--top-k", an.top_k, "Selection depth (default: protocol depth)");
    sub->add_option("--epsilon", an.epsilon, "Score-mode divergence tolerance")
        ->capture_default_str();
    sub->add_option("--threshold", an.threshold, "Minimum cosine of similarity groups")
        ->capture_default_str();
    sub->add_option("--containment", an_containment, "per_language or any_language")
        ->check(CLI::IsMember({"per_language", "any_language"}));
    sub->add_option("--gold-policy", an_gold_policy, "as_is or group_fallback")
        ->check(CLI::IsMember({"as_is", "group_fallback"}));
    sub->add_option("--languages", an_languages, "Accepted language codes");
    sub->callback([&an_mode, mode] { an_mode = mode; });
  }

  // report
  std::string config_path, report_out, report_mode;
  xlqa_pipeline_overrides overrides{};
  xlqa_pipeline_overrides_init(&overrides);
  auto* report_cmd = app.add_subcommand("report", "Run the whole pipeline from a config file");
  report_cmd->add_option("--config", config_path, "Pipeline config (JSON)")->required();
  report_cmd->add_option("--out-dir", report_out, "Override output directory");
  report_cmd->add_option("--mode", report_mode, "Override mode")
      ->check(CLI::IsMember({"oracle", "non-oracle"}));
  report_cmd->add_option("--k", overrides.k, "Override retrieval depth");
  report_cmd->add_option("--workers", overrides.workers, "Override worker count");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << json{{"error", "usage"}, {"message", e.what()}}.dump(-1, ' ', false, json::error_handler_t::replace) << '\n';
    return 64;
  }

  xlqa_set_warning_handler(print_warning, nullptr);

  try {
    if (index_build->parsed()) {
      Embeddings m;
      check(xlqa_embeddings_load(emb_path.c_str(), m.out()));
      Index idx;
      check(xlqa_index_build(m.get(), idx.out()));
      check(xlqa_index_save(idx.get(), index_out.c_str()));
      print_json({{"passages", xlqa_index_size(idx.get())}, {"dim", xlqa_index_dim(idx.get())}});
    } else if (index_search->parsed()) {
      Index idx;
      check(xlqa_index_load(index_path.c_str(), idx.out()));
      Embeddings q;
      check(xlqa_embeddings_load(queries_path.c_str(), q.out()));
      check(xlqa_index_search_to_file(idx.get(), q.get(), k, workers, search_out.c_str()));
      print_json({{"queries", xlqa_embeddings_count(q.get())}, {"k", k}});
    } else if (pair_mine->parsed()) {
      mine.questions_path = mine_questions.c_str();
      mine.embeddings_path = mine_embeddings.c_str();
      mine.src_lang = mine_src.c_str();
      mine.dst_lang = mine_dst.c_str();
      mine.out_path = mine_out.c_str();
      mine.translations_path = opt(mine_translations);
      mine.metrics_path = opt(mine_metrics);
      std::vector<const char*> langs;
      for (const auto& l : mine_languages) langs.push_back(l.c_str());
      mine.languages = langs.data();
      mine.n_languages = langs.size();
      xlqa_pair_mine_result r{};
      check(xlqa_pair_mine(&mine, &r));
      json j{{"pairs", r.pairs}};
      if (r.has_correlation) j["cosine_bleu_pearson"] = r.correlation;
      print_json(j);
    } else if (pair_ingest->parsed()) {
      std::size_t n = 0;
      check(xlqa_pair_ingest(ingest_file.c_str(), opt(ingest_out), &n));
      print_json({{"groups", n}});
    } else if (eval_score->parsed()) {
      xlqa_score_summary s{};
      check(xlqa_eval_score(eval_answers.c_str(), eval_questions.c_str(), eval_out.c_str(), &s));
      print_json({{"count", s.count}, {"mean_f1", s.mean_f1}, {"mean_em", s.mean_em}});
    } else if (!an_mode.empty()) {
      an.mode = an_mode.c_str();
      an.passages_path = an_passages.c_str();
      an.golds_path = an_golds.c_str();
      an.groups_path = an_groups.c_str();
      an.retrievals_path = an_retrievals.c_str();
      an.answers_path = opt(an_answers);
      an.labels_path = opt(an_labels);
      an.out_dir = an_out.c_str();
      an.containment = an_containment.c_str();
      an.gold_policy = an_gold_policy.c_str();
      std::vector<const char*> langs;
      for (const auto& l : an_languages) langs.push_back(l.c_str());
      an.languages = langs.data();
      an.n_languages = langs.size();
      xlqa_report_summary s{};
      OwnedString text;
      check(xlqa_analyze(&an, &s, text.out()));
      std::cout << text.str();
      print_json(summary_json(s));
    } else if (report_cmd->parsed()) {
      overrides.out_dir = opt(report_out);
      overrides.mode = opt(report_mode);
      xlqa_report_summary s{};
      OwnedString text;
      check(xlqa_run_pipeline(config_path.c_str(), &overrides, &s, text.out()));
      std::cout << text.str();
      print_json(summary_json(s));
    }
  } catch (const Failure& f) {
    std::cerr << json{{"error", xlqa_status_name(f.status)}, {"message", xlqa_last_error()}}.dump(-1, ' ', false, json::error_handler_t::replace)
              << '\n';
    return static_cast<int>(f.status);
  }
  return 0;
}
