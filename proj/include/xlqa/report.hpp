#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "xlqa/consistency.hpp"
#include "xlqa/error.hpp"
#include "xlqa/records.hpp"

namespace xlqa {

// --- heatmap table --------------------------------------------------------

/// group_id x language table of cell F1 values; a missing cell stays empty.
struct Heatmap {
  std::vector<LanguageCode> columns;
  std::vector<std::string> group_ids;
  std::vector<std::vector<std::optional<double>>> values;  // [row][column]

  bool operator==(const Heatmap&) const = default;
};

Heatmap heatmap_of(const ConsistencyMatrix& matrix);

// Header "group_id,<lang>,..." in column order, then one row per group.
void emit_heatmap_data(std::ostream& out, const ConsistencyMatrix& matrix);
Heatmap read_heatmap(std::istream& in);

// --- analysis over precomputed retrievals -------------------------------

struct AnalysisConfig {
  std::filesystem::path passages;
  std::filesystem::path golds;  // question records carrying gold_answers
  std::filesystem::path groups;
  std::filesystem::path retrievals;
  std::optional<std::filesystem::path> answers;
  std::optional<std::filesystem::path> labels;
  std::filesystem::path out_dir;

  SelectionMode mode = SelectionMode::oracle;
  std::optional<std::size_t> top_k;  // defaults to the mode's protocol depth
  double threshold = 0.7;
  double epsilon = kDefaultEpsilon;
  Containment containment = Containment::per_language;
  GoldPolicy gold_policy = GoldPolicy::as_is;
  LanguageSet languages = LanguageSet::analysis_default();
};

struct PipelineReport {
  std::vector<std::filesystem::path> outputs;  // in write order
  std::size_t groups = 0;
  std::size_t selected_groups = 0;
  std::size_t contexts = 0;
  std::optional<InconsistencyRate> score_rate;
  std::optional<InconsistencyRate> string_rate;
  std::optional<ErrorHistogram> histogram;
  std::string summary;
};

// Context selection, matrix, rates and histogram from files on disk; writes
// every artifact except the retrievals under config.out_dir.
PipelineReport run_analysis(const AnalysisConfig& config, const WarningSink& warn = {});

// --- pipeline -------------------------------------------------------------

struct PipelineConfig {
  std::filesystem::path passages;
  std::filesystem::path passage_embeddings;
  std::filesystem::path questions;
  std::filesystem::path question_embeddings;
  std::filesystem::path groups;
  std::optional<std::filesystem::path> golds;  // defaults to `questions`
  std::optional<std::filesystem::path> answers;
  std::optional<std::filesystem::path> labels;
  std::filesystem::path out_dir;

  SelectionMode mode = SelectionMode::oracle;
  // Retrieval depth; defaults to the mode's protocol depth.
  std::optional<std::size_t> k;
  double threshold = 0.7;
  double epsilon = kDefaultEpsilon;
  std::size_t workers = 1;
  Containment containment = Containment::per_language;
  GoldPolicy gold_policy = GoldPolicy::as_is;
  LanguageSet languages = LanguageSet::analysis_default();

  std::size_t retrieval_depth() const { return k.value_or(default_top_k(mode)); }
};

// Reads a JSON config. Relative paths resolve against the config's directory.
PipelineConfig load_pipeline_config(const std::filesystem::path& path);


// Runs retrieval, context selection, scoring and aggregation, writing every
// artifact under config.out_dir. Identical inputs give byte-identical files.
PipelineReport run_pipeline(const PipelineConfig& config, const WarningSink& warn = {});

// Output file names inside out_dir.
namespace artifact {
inline constexpr const char* kRetrievals = "retrievals.jsonl";
inline constexpr const char* kContexts = "contexts.jsonl";
inline constexpr const char* kSelectedGroups = "selected_groups.jsonl";
inline constexpr const char* kMatrix = "matrix.jsonl";
inline constexpr const char* kHeatmap = "heatmap.csv";
inline constexpr const char* kRates = "rates.jsonl";
inline constexpr const char* kHistogram = "error_histogram.jsonl";
inline constexpr const char* kSummary = "summary.txt";
}  // namespace artifact

}  // namespace xlqa
