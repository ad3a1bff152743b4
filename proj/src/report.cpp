#include "xlqa/report.hpp"

#include <charconv>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <unordered_set>

#include "csv.hpp"
#include "jsonl.hpp"
#include "xlqa/embeddings.hpp"
#include "xlqa/index.hpp"

namespace xlqa {

namespace fs = std::filesystem;
using detail::Json;

// --- heatmap ----------------------------------------------------------------

Heatmap heatmap_of(const ConsistencyMatrix& matrix) {
  Heatmap h;
  h.columns = matrix.columns();
  for (const auto& row : matrix.rows()) {
    h.group_ids.push_back(row.group_id);
    std::vector<std::optional<double>> values;
    for (const auto& lang : h.columns) {
      auto it = row.cells.find(lang);
      values.push_back(it == row.cells.end() ? std::nullopt : std::optional(it->second.f1));
    }
    h.values.push_back(std::move(values));
  }
  return h;
}

void emit_heatmap_data(std::ostream& out, const ConsistencyMatrix& matrix) {
  const Heatmap h = heatmap_of(matrix);
  std::vector<std::string> fields{"group_id"};
  for (const auto& c : h.columns) fields.push_back(c.str());
  detail::write_csv_row(out, fields);
  for (std::size_t r = 0; r < h.group_ids.size(); ++r) {
    fields.assign(1, h.group_ids[r]);
    for (const auto& v : h.values[r]) fields.push_back(v ? detail::format_double(*v) : "");
    detail::write_csv_row(out, fields);
  }
}

Heatmap read_heatmap(std::istream& in) {
  Heatmap h;
  std::vector<std::string> fields;
  if (!detail::read_csv_row(in, fields) || fields.empty() || fields[0] != "group_id") {
    throw Error(ErrorCode::parse, "heatmap: missing header");
  }
  for (std::size_t i = 1; i < fields.size(); ++i) {
    h.columns.push_back(LanguageCode::parse(fields[i]));
  }
  std::size_t line = 1;
  while (detail::read_csv_row(in, fields)) {
    ++line;
    const std::string where = "heatmap line " + std::to_string(line) + ": ";
    if (fields.size() != h.columns.size() + 1) {
      throw Error(ErrorCode::parse, where + "expected " + std::to_string(h.columns.size() + 1) +
                                        " fields");
    }
    h.group_ids.push_back(fields[0]);
    std::vector<std::optional<double>> values;
    for (std::size_t i = 1; i < fields.size(); ++i) {
      if (fields[i].empty()) {
        values.emplace_back();
        continue;
      }
      double v = 0.0;
      const char* end = fields[i].data() + fields[i].size();
      auto [ptr, ec] = std::from_chars(fields[i].data(), end, v);
      if (ec != std::errc{} || ptr != end || v < 0.0 || v > 1.0) {
        throw Error(ErrorCode::parse, where + "bad F1 value '" + fields[i] + "'");
      }
      values.emplace_back(v);
    }
    h.values.push_back(std::move(values));
  }
  return h;
}

// --- shared analysis core -------------------------------------------------

namespace {

void require_input(const fs::path& path, const char* role) {
  std::error_code ec;
  if (!fs::is_regular_file(path, ec)) {
    throw Error(ErrorCode::not_found,
                std::string("missing input '") + role + "': " + path.string());
  }
}

struct AnalysisInputs {
  PassageCorpus corpus;
  QuestionSet golds;
  std::vector<QuestionGroup> groups;
  std::vector<RetrievalResult> retrievals;
  std::optional<std::vector<AnswerRecord>> answers;
  std::optional<std::vector<ErrorLabel>> labels;
};

struct AnalysisSettings {
  SelectionMode mode = SelectionMode::oracle;
  std::size_t top_k = kOracleTopK;
  double epsilon = kDefaultEpsilon;
  Containment containment = Containment::per_language;
  GoldPolicy gold_policy = GoldPolicy::as_is;
  fs::path out_dir;
};

class OutputDir {
 public:
  OutputDir(fs::path dir, PipelineReport& report) : dir_(std::move(dir)), report_(report) {
    std::error_code ec;
    fs::create_directories(dir_, ec);
    if (ec) throw Error(ErrorCode::io, "cannot create output directory '" + dir_.string() + "'");
  }

  template <class Fn>
  void write(const char* name, Fn&& fn) {
    const fs::path path = dir_ / name;
    auto out = detail::open_output(path, std::ios::out | std::ios::binary);
    fn(out);
    out.flush();
    if (!out) throw Error(ErrorCode::io, "write failure on '" + path.string() + "'");
    report_.outputs.push_back(path);
  }

 private:
  fs::path dir_;
  PipelineReport& report_;
};

std::string format_rate(const InconsistencyRate& r) {
  std::ostringstream s;
  s << r.count_inconsistent << " / " << r.total << " = " << std::fixed << std::setprecision(6)
    << r.rate;
  return s.str();
}

void analyze(const AnalysisInputs& in, const AnalysisSettings& settings,
             std::vector<std::string> summary_lines, PipelineReport& report,
             const WarningSink& warn) {
  validate_group_references(in.golds, in.groups);

  OutputDir out(settings.out_dir, report);
  const RetrievalLookup lookup(in.retrievals);

  for (const auto& g : in.groups) {
    for (const auto& m : g.members) {
      if (!lookup.find(m.qid) && warn) {
        warn("no retrieval result for question '" + m.qid + "' in group '" + g.group_id + "'");
      }
    }
  }

  const std::vector<SelectedGroup> selected =
      settings.mode == SelectionMode::oracle
          ? oracle_filter(in.groups, lookup, in.corpus, in.golds, settings.top_k,
                          settings.containment)
          : non_oracle_select(in.groups, lookup, in.corpus, settings.top_k);
  const std::vector<ContextChoice> contexts = flatten_contexts(selected);

  std::vector<QuestionGroup> selected_groups;
  selected_groups.reserve(selected.size());
  for (const auto& s : selected) selected_groups.push_back(s.group);

  report.groups = in.groups.size();
  report.selected_groups = selected.size();
  report.contexts = contexts.size();

  out.write(artifact::kContexts, [&](std::ostream& o) { write_contexts(o, contexts); });
  out.write(artifact::kSelectedGroups, [&](std::ostream& o) { write_groups(o, selected_groups); });

  summary_lines.push_back("mode: " + std::string(to_string(settings.mode)));
  summary_lines.push_back("selection top_k: " + std::to_string(settings.top_k));
  if (settings.mode == SelectionMode::oracle) {
    summary_lines.push_back("containment: " + std::string(to_string(settings.containment)));
  }
  summary_lines.push_back("groups: " + std::to_string(report.groups));
  summary_lines.push_back("groups selected: " + std::to_string(report.selected_groups));
  summary_lines.push_back("contexts selected: " + std::to_string(report.contexts));

  if (in.answers) {
    // Answers should have been generated from the selected contexts.
    std::unordered_map<std::string_view, std::string_view> chosen;
    for (const auto& c : contexts) chosen.emplace(c.qid, c.pid);
    for (const auto& a : *in.answers) {
      auto it = chosen.find(a.qid);
      if (it != chosen.end() && it->second != a.context_pid && warn) {
        warn("answer for qid '" + a.qid + "' used context '" + a.context_pid +
             "' but the selected context is '" + std::string(it->second) + "'");
      }
    }

    const ConsistencyMatrix matrix = build_consistency_matrix(
        selected_groups, *in.answers, in.golds, warn, settings.gold_policy);
    out.write(artifact::kMatrix, [&](std::ostream& o) { write_matrix(o, matrix); });
    out.write(artifact::kHeatmap, [&](std::ostream& o) { emit_heatmap_data(o, matrix); });

    summary_lines.push_back("matrix rows: " + std::to_string(matrix.rows().size()));
    summary_lines.push_back("gold policy: " + std::string(to_string(settings.gold_policy)));
    if (!matrix.empty()) {
      report.score_rate = inconsistency_rate(matrix, DivergenceMode::score, settings.epsilon);
      report.string_rate = inconsistency_rate(matrix, DivergenceMode::string, settings.epsilon);
      const std::vector<InconsistencyRate> rates{*report.score_rate, *report.string_rate};
      out.write(artifact::kRates, [&](std::ostream& o) { write_rates(o, rates); });

      std::size_t cells = 0;
      double f1_sum = 0.0;
      for (const auto& row : matrix.rows()) {
        for (const auto& [lang, cell] : row.cells) {
          ++cells;
          f1_sum += cell.f1;
        }
      }
      std::ostringstream eps;
      eps << settings.epsilon;
      summary_lines.push_back("inconsistent (score, epsilon=" + eps.str() +
                              "): " + format_rate(*report.score_rate));
      summary_lines.push_back("inconsistent (string): " + format_rate(*report.string_rate));
      if (cells > 0) {
        std::ostringstream mean;
        mean << std::fixed << std::setprecision(6) << f1_sum / static_cast<double>(cells);
        summary_lines.push_back("answered cells: " + std::to_string(cells) +
                                ", mean F1: " + mean.str());
      }
    } else if (warn) {
      warn("no groups selected; rates not computed");
    }
  }

  if (in.labels) {
    report.histogram = error_distribution(*in.labels);
    out.write(artifact::kHistogram, [&](std::ostream& o) { write_histogram(o, *report.histogram); });
    summary_lines.push_back("error labels: " + std::to_string(report.histogram->total()));
    for (ErrorType t : all_error_types()) {
      summary_lines.push_back("  " + std::string(to_string(t)) + ": " +
                              std::to_string(report.histogram->count(t)));
    }
  }

  std::string summary;
  for (const auto& l : summary_lines) summary += l + '\n';
  report.summary = summary;
  out.write(artifact::kSummary, [&](std::ostream& o) { o << summary; });
}

IngestOptions ingest_options(const LanguageSet& languages, double threshold) {
  IngestOptions o;
  o.languages = languages;
  o.min_cosine = threshold;
  return o;
}

}  // namespace

PipelineReport run_analysis(const AnalysisConfig& config, const WarningSink& warn) {
  require_input(config.passages, "passages");
  require_input(config.golds, "golds");
  require_input(config.groups, "groups");
  require_input(config.retrievals, "retrievals");
  if (config.answers) require_input(*config.answers, "answers");
  if (config.labels) require_input(*config.labels, "labels");

  const IngestOptions opts = ingest_options(config.languages, config.threshold);
  AnalysisInputs in;
  in.corpus = load_passages(config.passages, opts);
  in.golds = load_questions(config.golds, opts);
  in.groups = load_groups(config.groups, opts);
  in.retrievals = load_retrievals(config.retrievals);
  if (config.answers) in.answers = load_answers(*config.answers, opts);
  if (config.labels) in.labels = load_labels(*config.labels, opts);

  AnalysisSettings settings;
  settings.mode = config.mode;
  settings.top_k = config.top_k.value_or(default_top_k(config.mode));
  settings.epsilon = config.epsilon;
  settings.containment = config.containment;
  settings.gold_policy = config.gold_policy;
  settings.out_dir = config.out_dir;
  if (settings.top_k == 0) throw Error(ErrorCode::invalid_argument, "top_k must be at least 1");

  PipelineReport report;
  analyze(in, settings, {}, report, warn);
  return report;
}

PipelineConfig load_pipeline_config(const fs::path& path) {
  require_input(path, "config");
  auto in = detail::open_input(path);
  Json j;
  try {
    j = Json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::parse, path.string() + ": malformed config: " + e.what());
  }
  if (!j.is_object()) throw Error(ErrorCode::parse, path.string() + ": config is not an object");

  const fs::path base = path.parent_path();
  const auto resolve = [&](const std::string& p) {
    fs::path q(p);
    return q.is_absolute() ? q : base / q;
  };

  try {
    PipelineConfig c;
    c.passages = resolve(detail::get_string(j, "passages"));
    c.passage_embeddings = resolve(detail::get_string(j, "passage_embeddings"));
    c.questions = resolve(detail::get_string(j, "questions"));
    c.question_embeddings = resolve(detail::get_string(j, "question_embeddings"));
    c.groups = resolve(detail::get_string(j, "groups"));
    c.out_dir = resolve(detail::get_string(j, "out_dir"));
    if (auto v = detail::get_optional_string(j, "golds")) c.golds = resolve(*v);
    if (auto v = detail::get_optional_string(j, "answers")) c.answers = resolve(*v);
    if (auto v = detail::get_optional_string(j, "labels")) c.labels = resolve(*v);
    if (auto v = detail::get_optional_string(j, "mode")) c.mode = parse_selection_mode(*v);
    if (j.contains("k")) c.k = detail::get_size(j, "k");
    if (auto v = detail::get_optional_double(j, "threshold")) c.threshold = *v;
    if (auto v = detail::get_optional_double(j, "epsilon")) c.epsilon = *v;
    if (j.contains("workers")) c.workers = detail::get_size(j, "workers");
    if (auto v = detail::get_optional_string(j, "containment")) c.containment = parse_containment(*v);
    if (auto v = detail::get_optional_string(j, "gold_policy")) c.gold_policy = parse_gold_policy(*v);
    if (j.contains("languages")) {
      std::set<LanguageCode> codes;
      for (const auto& code : detail::get_string_array(j, "languages")) {
        codes.insert(LanguageCode::parse(code));
      }
      c.languages = LanguageSet(std::move(codes));
    }
    return c;
  } catch (const Error& e) {
    throw Error(e.code(), path.string() + ": " + e.what());
  }
}

PipelineReport run_pipeline(const PipelineConfig& config, const WarningSink& warn) {
  require_input(config.passages, "passages");
  require_input(config.passage_embeddings, "passage_embeddings");
  require_input(config.questions, "questions");
  require_input(config.question_embeddings, "question_embeddings");
  require_input(config.groups, "groups");
  const fs::path golds_path = config.golds.value_or(config.questions);
  require_input(golds_path, "golds");
  if (config.answers) require_input(*config.answers, "answers");
  if (config.labels) require_input(*config.labels, "labels");

  const std::size_t k = config.retrieval_depth();
  if (k == 0) throw Error(ErrorCode::invalid_argument, "k must be at least 1");
  const std::size_t protocol_k = default_top_k(config.mode);
  if (k < protocol_k && warn) {
    warn(std::string(to_string(config.mode)) + " protocol uses the top " +
         std::to_string(protocol_k) + " retrievals but k = " + std::to_string(k));
  }

  const IngestOptions opts = ingest_options(config.languages, config.threshold);
  AnalysisInputs in;
  in.corpus = load_passages(config.passages, opts);
  in.golds = load_questions(golds_path, opts);
  const QuestionSet questions =
      golds_path == config.questions ? in.golds : load_questions(config.questions, opts);
  in.groups = load_groups(config.groups, opts);
  if (config.answers) in.answers = load_answers(*config.answers, opts);
  if (config.labels) in.labels = load_labels(*config.labels, opts);

  auto passage_vectors = std::make_shared<const EmbeddingMatrix>(
      load_embeddings(config.passage_embeddings));
  for (const auto& id : passage_vectors->ids()) {
    if (!in.corpus.find(id)) {
      throw Error(ErrorCode::not_found, "passage embedding '" + id + "' has no passage record");
    }
  }
  if (passage_vectors->size() != in.corpus.size() && warn) {
    warn(std::to_string(in.corpus.size() - passage_vectors->size()) +
         " passages have no embedding and cannot be retrieved");
  }
  const FlatIpIndex index = FlatIpIndex::build(passage_vectors);

  const EmbeddingMatrix question_vectors = load_embeddings(config.question_embeddings);
  if (question_vectors.dim() != index.dim()) {
    throw Error(ErrorCode::dimension_mismatch,
                "question embeddings have dim " + std::to_string(question_vectors.dim()) +
                    " but passage embeddings have dim " + std::to_string(index.dim()));
  }
  for (const auto& id : question_vectors.ids()) {
    if (!questions.find(id)) {
      throw Error(ErrorCode::not_found, "question embedding '" + id + "' has no question record");
    }
  }
  in.retrievals = index.batch_search(question_vectors, k, config.workers);

  PipelineReport report;
  {
    OutputDir out(config.out_dir, report);
    out.write(artifact::kRetrievals, [&](std::ostream& o) { write_retrievals(o, in.retrievals); });
  }

  AnalysisSettings settings;
  settings.mode = config.mode;
  settings.top_k = protocol_k;
  settings.epsilon = config.epsilon;
  settings.containment = config.containment;
  settings.gold_policy = config.gold_policy;
  settings.out_dir = config.out_dir;

  std::vector<std::string> header{
      "passages: " + std::to_string(in.corpus.size()),
      "questions: " + std::to_string(questions.size()),
      "embedding dim: " + std::to_string(index.dim()),
      "retrieval depth k: " + std::to_string(k),
  };
  analyze(in, settings, std::move(header), report, warn);
  return report;
}

}  // namespace xlqa
