#pragma once

#include <compare>
#include <cstddef>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace xlqa {

/// Lowercase ASCII language tag of two or three letters ("en", "fi", "ko").
class LanguageCode {
 public:
  LanguageCode() = default;

  // Throws Error(invalid_argument) unless `code` is 2-3 ASCII lowercase letters.
  static LanguageCode parse(std::string_view code);

  const std::string& str() const noexcept { return code_; }

  auto operator<=>(const LanguageCode&) const = default;

 private:
  explicit LanguageCode(std::string code) : code_(std::move(code)) {}
  std::string code_;
};

/// Languages accepted at ingestion.
class LanguageSet {
 public:
  LanguageSet() = default;
  explicit LanguageSet(std::set<LanguageCode> codes) : codes_(std::move(codes)) {}

  // The thirteen retrieval languages of the analysis.
  static LanguageSet analysis_default();
  // Accepts any syntactically valid code.
  static LanguageSet any();

  bool contains(const LanguageCode& code) const;
  const std::set<LanguageCode>& codes() const noexcept { return codes_; }
  bool is_open() const noexcept { return open_; }

 private:
  std::set<LanguageCode> codes_;
  bool open_ = false;
};

struct Passage {
  std::string pid;
  LanguageCode lang;
  std::string title;
  std::string text;

  bool operator==(const Passage&) const = default;
};

struct Question {
  std::string qid;
  LanguageCode lang;
  std::string text;
  std::vector<std::string> gold_answers;
  std::optional<std::string> group_id;

  bool operator==(const Question&) const = default;
};

struct Hit {
  std::string pid;
  double score = 0.0;
  std::size_t rank = 0;

  bool operator==(const Hit&) const = default;
};

/// Ranked hits for one query. Construction checks that ranks run 1..n, scores
/// never increase and no pid repeats.
class RetrievalResult {
 public:
  RetrievalResult() = default;
  RetrievalResult(std::string qid, std::vector<Hit> hits);

  const std::string& qid() const noexcept { return qid_; }
  const std::vector<Hit>& hits() const noexcept { return hits_; }

  bool operator==(const RetrievalResult&) const = default;

 private:
  std::string qid_;
  std::vector<Hit> hits_;
};

enum class Provenance { translation, similarity };

std::string_view to_string(Provenance p);
Provenance parse_provenance(std::string_view s);

struct GroupMember {
  std::string qid;
  LanguageCode lang;
  Provenance provenance = Provenance::translation;
  std::optional<double> cosine;

  bool operator==(const GroupMember&) const = default;
};

struct QuestionGroup {
  std::string group_id;
  std::vector<GroupMember> members;

  bool operator==(const QuestionGroup&) const = default;

  const GroupMember* find_language(const LanguageCode& lang) const;
};

// Throws Error(invariant) naming the group: fewer than two members, a repeated
// language or qid, or a similarity member whose cosine is missing or below
// `min_cosine`.
void validate_group(const QuestionGroup& group, double min_cosine);

struct AnswerRecord {
  std::string qid;
  LanguageCode lang;
  std::string context_pid;
  std::string answer;

  bool operator==(const AnswerRecord&) const = default;
};

enum class ErrorType {
  translation_issue,
  retriever_issue,
  answer_extractor_issue,
  inconsistent_facts,
  granularity_mismatch,
  unrelated_context,
  related_no_answer,
};

inline constexpr std::size_t kErrorTypeCount = 7;

std::string_view to_string(ErrorType t);
// Throws Error(parse) for strings outside the closed enumeration.
ErrorType parse_error_type(std::string_view s);
const std::vector<ErrorType>& all_error_types();

struct ErrorLabel {
  std::string group_id;
  ErrorType error_type = ErrorType::translation_issue;
  std::string note;
  std::optional<LanguageCode> lang;

  bool operator==(const ErrorLabel&) const = default;
};

}  // namespace xlqa
