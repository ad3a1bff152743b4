#pragma once

#include <cstddef>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "xlqa/records.hpp"
#include "xlqa/types.hpp"

namespace xlqa {

// Splits case-folded, punctuation-free text into tokens. The input still
// contains its original whitespace.
using Segmenter = std::function<std::vector<std::string>(std::string_view)>;

/// Per-language replacements for whitespace splitting.
class Segmenters {
 public:
  // Registers the code-point fallback for "zh".
  static const Segmenters& defaults();
  static Segmenters whitespace_only() { return {}; }

  void set(const LanguageCode& lang, Segmenter seg) { by_lang_[lang] = std::move(seg); }
  const Segmenter* find(const LanguageCode& lang) const;

 private:
  std::map<LanguageCode, Segmenter> by_lang_;
};

// Whitespace split, except that every code point of a script written without
// spaces (Han, kana, Thai, Lao, Khmer, Myanmar) becomes its own token.
std::vector<std::string> segment_code_points(std::string_view normalized);

// Simple case folding, removal of every general-category P code point, then
// whitespace splitting (or the language's segmenter). Empty tokens are dropped.
// Invalid UTF-8 sequences are read as U+FFFD.
std::vector<std::string> normalize_and_tokenize(
    std::string_view text, const LanguageCode& lang,
    const Segmenters& segmenters = Segmenters::defaults());

// F1 over token multisets: 1 when both are empty, 0 when exactly one is.
double token_f1_tokens(std::span<const std::string> prediction, std::span<const std::string> gold);

// Maximum over golds; 0 for an empty gold list.
double token_f1(std::string_view prediction, std::span<const std::string> golds,
                const LanguageCode& lang, const Segmenters& segmenters = Segmenters::defaults());

int exact_match(std::string_view prediction, std::span<const std::string> golds,
                const LanguageCode& lang, const Segmenters& segmenters = Segmenters::defaults());

struct ScoringInput {
  std::string prediction;
  std::vector<std::string> golds;
  LanguageCode lang;
};

// Arithmetic mean of token_f1; throws on an empty list.
double mean_token_f1(std::span<const ScoringInput> records,
                     const Segmenters& segmenters = Segmenters::defaults());

// --- answer scoring against question golds --------------------------------

struct ScoreRecord {
  std::string qid;
  LanguageCode lang;
  double f1 = 0.0;
  int em = 0;
  bool no_gold = false;

  bool operator==(const ScoreRecord&) const = default;
};

struct ScoreSummary {
  std::size_t count = 0;
  double mean_f1 = 0.0;
  double mean_em = 0.0;
};

// Scores each answer against the golds of the question with the same qid.
// An answer whose qid is unknown is rejected.
std::vector<ScoreRecord> score_answers(const std::vector<AnswerRecord>& answers,
                                       const QuestionSet& questions,
                                       const Segmenters& segmenters = Segmenters::defaults());
ScoreSummary summarize_scores(std::span<const ScoreRecord> scores);

std::vector<ScoreRecord> read_scores(std::istream& in, std::string_view source = "<scores>");
void write_scores(std::ostream& out, std::span<const ScoreRecord> scores);

}  // namespace xlqa
