#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "xlqa/types.hpp"

namespace xlqa {

// Line-delimited UTF-8 records, one JSON object per line. Blank lines are
// ignored; any other line is either accepted or rejected with its line number.

struct IngestOptions {
  LanguageSet languages = LanguageSet::analysis_default();
  // Lower bound for the cosine of similarity-provenance group members.
  double min_cosine = 0.7;
};

class PassageCorpus {
 public:
  // Throws Error(duplicate) on a repeated pid.
  void add(Passage p);

  const Passage* find(std::string_view pid) const;
  const std::vector<Passage>& passages() const noexcept { return passages_; }
  std::size_t size() const noexcept { return passages_.size(); }

 private:
  std::vector<Passage> passages_;
  std::unordered_map<std::string, std::size_t> by_pid_;
};

class QuestionSet {
 public:
  void add(Question q);

  const Question* find(std::string_view qid) const;
  const std::vector<Question>& questions() const noexcept { return questions_; }
  std::size_t size() const noexcept { return questions_.size(); }

 private:
  std::vector<Question> questions_;
  std::unordered_map<std::string, std::size_t> by_qid_;
};

PassageCorpus read_passages(std::istream& in, const IngestOptions& opts = {},
                            std::string_view source = "<passages>");
PassageCorpus load_passages(const std::filesystem::path& path, const IngestOptions& opts = {});
void write_passages(std::ostream& out, const PassageCorpus& corpus);

QuestionSet read_questions(std::istream& in, const IngestOptions& opts = {},
                           std::string_view source = "<questions>");
QuestionSet load_questions(const std::filesystem::path& path, const IngestOptions& opts = {});
void write_questions(std::ostream& out, const QuestionSet& questions);

// Groups are validated with validate_group(opts.min_cosine); group ids are unique.
std::vector<QuestionGroup> read_groups(std::istream& in, const IngestOptions& opts = {},
                                       std::string_view source = "<groups>");
std::vector<QuestionGroup> load_groups(const std::filesystem::path& path,
                                       const IngestOptions& opts = {});
void write_groups(std::ostream& out, const std::vector<QuestionGroup>& groups);

// One answer per qid.
std::vector<AnswerRecord> read_answers(std::istream& in, const IngestOptions& opts = {},
                                       std::string_view source = "<answers>");
std::vector<AnswerRecord> load_answers(const std::filesystem::path& path,
                                       const IngestOptions& opts = {});
void write_answers(std::ostream& out, const std::vector<AnswerRecord>& answers);

std::vector<ErrorLabel> read_labels(std::istream& in, const IngestOptions& opts = {},
                                    std::string_view source = "<labels>");
std::vector<ErrorLabel> load_labels(const std::filesystem::path& path,
                                    const IngestOptions& opts = {});
void write_labels(std::ostream& out, const std::vector<ErrorLabel>& labels);

// One result per qid.
std::vector<RetrievalResult> read_retrievals(std::istream& in,
                                             std::string_view source = "<retrievals>");
std::vector<RetrievalResult> load_retrievals(const std::filesystem::path& path);
void write_retrievals(std::ostream& out, const std::vector<RetrievalResult>& results);

// Checks that every question's group_id names one of `groups` and that every
// group member resolves to a question of the same language.
void validate_group_references(const QuestionSet& questions,
                               const std::vector<QuestionGroup>& groups);

}  // namespace xlqa
