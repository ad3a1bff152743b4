#pragma once

#include <array>
#include <cstddef>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "xlqa/error.hpp"
#include "xlqa/metrics.hpp"
#include "xlqa/records.hpp"
#include "xlqa/types.hpp"

namespace xlqa {

enum class SelectionMode { oracle, non_oracle };

inline constexpr std::size_t kOracleTopK = 20;
inline constexpr std::size_t kNonOracleTopK = 1000;

std::string_view to_string(SelectionMode mode);
SelectionMode parse_selection_mode(std::string_view s);
std::size_t default_top_k(SelectionMode mode);

/// Retrieval results keyed by qid. Holds pointers into the source vector.
class RetrievalLookup {
 public:
  explicit RetrievalLookup(std::span<const RetrievalResult> results);
  const RetrievalResult* find(std::string_view qid) const;

 private:
  std::unordered_map<std::string_view, const RetrievalResult*> by_qid_;
};

struct ContextChoice {
  std::string group_id;
  std::string qid;
  LanguageCode lang;
  std::string pid;
  double score = 0.0;
  std::size_t rank = 0;

  bool operator==(const ContextChoice&) const = default;
};

using LanguageContexts = std::map<LanguageCode, std::optional<ContextChoice>>;

// For every member: the best hit with rank <= top_k whose passage is in the
// member's language. A member without a retrieval result or without such a hit
// maps to nullopt. Throws Error(not_found) for a hit pid missing from `corpus`.
LanguageContexts select_in_language_context(const QuestionGroup& group,
                                            const RetrievalLookup& retrievals,
                                            const PassageCorpus& corpus, std::size_t top_k);

// A group after context selection; members and contexts cover the same languages.
struct SelectedGroup {
  QuestionGroup group;
  std::map<LanguageCode, ContextChoice> contexts;
};

enum class Containment {
  per_language,  // a language's gold must occur in that language's context
  any_language,  // any member's gold may occur in the context
};

std::string_view to_string(Containment c);
Containment parse_containment(std::string_view s);

// True when the space-joined normalized tokens of some non-empty gold occur as
// a substring of the space-joined normalized tokens of `context`.
bool context_contains_gold(std::string_view context, std::span<const std::string> golds,
                           const LanguageCode& lang,
                           const Segmenters& segmenters = Segmenters::defaults());

// Oracle protocol: select contexts within the top `top_k`, drop languages whose
// context lacks the gold, keep groups that still span at least two languages.
std::vector<SelectedGroup> oracle_filter(std::span<const QuestionGroup> groups,
                                         const RetrievalLookup& retrievals,
                                         const PassageCorpus& corpus,
                                         const QuestionSet& golds,
                                         std::size_t top_k = kOracleTopK,
                                         Containment containment = Containment::per_language,
                                         const Segmenters& segmenters = Segmenters::defaults());

// Non-oracle protocol: every group is kept with whatever in-language contexts
// exist within the top `top_k`; members keep their place even without one.
std::vector<SelectedGroup> non_oracle_select(std::span<const QuestionGroup> groups,
                                             const RetrievalLookup& retrievals,
                                             const PassageCorpus& corpus,
                                             std::size_t top_k = kNonOracleTopK);

std::vector<ContextChoice> flatten_contexts(std::span<const SelectedGroup> groups);
void write_contexts(std::ostream& out, std::span<const ContextChoice> contexts);
std::vector<ContextChoice> read_contexts(std::istream& in, std::string_view source = "<contexts>");

// --- consistency matrix ---------------------------------------------------

struct MatrixCell {
  std::string answer;
  double f1 = 0.0;
  int em = 0;
  std::string context_pid;
  bool no_gold = false;

  bool operator==(const MatrixCell&) const = default;
};

struct MatrixRow {
  std::string group_id;
  std::vector<LanguageCode> languages;  // the group's member languages, sorted
  std::map<LanguageCode, MatrixCell> cells;

  bool operator==(const MatrixRow&) const = default;
};

class ConsistencyMatrix {
 public:
  ConsistencyMatrix() = default;
  // Checks that cells only use the row's languages and that f1 is in [0, 1].
  explicit ConsistencyMatrix(std::vector<MatrixRow> rows);

  const std::vector<MatrixRow>& rows() const noexcept { return rows_; }
  // Sorted union of all row languages.
  const std::vector<LanguageCode>& columns() const noexcept { return columns_; }
  bool empty() const noexcept { return rows_.empty(); }

  bool operator==(const ConsistencyMatrix&) const = default;

 private:
  std::vector<MatrixRow> rows_;
  std::vector<LanguageCode> columns_;
};

enum class GoldPolicy {
  as_is,           // score against the answered question's own golds
  group_fallback,  // a member without golds borrows the other members' golds
};

std::string_view to_string(GoldPolicy p);
GoldPolicy parse_gold_policy(std::string_view s);

// One row per group. Answers for qids outside every group are reported
// through `warn` and skipped; an answer whose language disagrees with its
// group member is rejected.
ConsistencyMatrix build_consistency_matrix(std::span<const QuestionGroup> groups,
                                           std::span<const AnswerRecord> answers,
                                           const QuestionSet& golds,
                                           const WarningSink& warn = {},
                                           GoldPolicy policy = GoldPolicy::as_is,
                                           const Segmenters& segmenters = Segmenters::defaults());

void write_matrix(std::ostream& out, const ConsistencyMatrix& matrix);
ConsistencyMatrix read_matrix(std::istream& in, std::string_view source = "<matrix>");

enum class DivergenceMode {
  string,  // normalized answer tokens differ between two cells
  score,   // max - min cell F1 exceeds epsilon
};

inline constexpr double kDefaultEpsilon = 1e-6;

std::string_view to_string(DivergenceMode m);

struct InconsistencyRate {
  DivergenceMode mode = DivergenceMode::score;
  double epsilon = kDefaultEpsilon;
  std::size_t count_inconsistent = 0;
  std::size_t total = 0;
  double rate = 0.0;

  bool operator==(const InconsistencyRate&) const = default;
};

bool row_is_inconsistent(const MatrixRow& row, DivergenceMode mode, double epsilon,
                         const Segmenters& segmenters = Segmenters::defaults());

// Throws on an empty matrix.
InconsistencyRate inconsistency_rate(const ConsistencyMatrix& matrix, DivergenceMode mode,
                                     double epsilon = kDefaultEpsilon,
                                     const Segmenters& segmenters = Segmenters::defaults());

void write_rates(std::ostream& out, std::span<const InconsistencyRate> rates);
std::vector<InconsistencyRate> read_rates(std::istream& in, std::string_view source = "<rates>");

// --- error taxonomy -------------------------------------------------------

using ErrorCounts = std::array<std::size_t, kErrorTypeCount>;

struct ErrorHistogram {
  ErrorCounts overall{};
  std::map<LanguageCode, ErrorCounts> per_language;

  std::size_t total() const;
  std::size_t count(ErrorType t) const { return overall[static_cast<std::size_t>(t)]; }

  bool operator==(const ErrorHistogram&) const = default;
};

ErrorHistogram error_distribution(std::span<const ErrorLabel> labels);

// Overall counts for every type in enumeration order, then per-language counts
// in language order.
void write_histogram(std::ostream& out, const ErrorHistogram& h);
ErrorHistogram read_histogram(std::istream& in, std::string_view source = "<histogram>");

}  // namespace xlqa
