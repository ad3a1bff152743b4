#include "xlqa/types.hpp"

#include <algorithm>
#include <array>
#include <unordered_set>

#include "xlqa/error.hpp"

namespace xlqa {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::invalid_argument: return "invalid_argument";
    case ErrorCode::io: return "io_error";
    case ErrorCode::parse: return "parse_error";
    case ErrorCode::format: return "format_error";
    case ErrorCode::dimension_mismatch: return "dimension_mismatch";
    case ErrorCode::not_found: return "not_found";
    case ErrorCode::duplicate: return "duplicate";
    case ErrorCode::invariant: return "invariant_violation";
    case ErrorCode::internal: return "internal_error";
  }
  return "internal_error";
}

LanguageCode LanguageCode::parse(std::string_view code) {
  const bool shape_ok = code.size() >= 2 && code.size() <= 3 &&
                        std::all_of(code.begin(), code.end(),
                                    [](char c) { return c >= 'a' && c <= 'z'; });
  if (!shape_ok) {
    throw Error(ErrorCode::invalid_argument,
                "invalid language code '" + std::string(code) +
                    "' (expected 2-3 lowercase ASCII letters)");
  }
  return LanguageCode(std::string(code));
}

LanguageSet LanguageSet::analysis_default() {
  static constexpr std::array<std::string_view, 13> kCodes = {
      "en", "ar", "fi", "ja", "ko", "ru", "bn", "te", "id", "th", "he", "sv", "es"};
  std::set<LanguageCode> codes;
  for (auto c : kCodes) codes.insert(LanguageCode::parse(c));
  return LanguageSet(std::move(codes));
}

LanguageSet LanguageSet::any() {
  LanguageSet s;
  s.open_ = true;
  return s;
}

bool LanguageSet::contains(const LanguageCode& code) const {
  return open_ || codes_.count(code) > 0;
}

RetrievalResult::RetrievalResult(std::string qid, std::vector<Hit> hits)
    : qid_(std::move(qid)), hits_(std::move(hits)) {
  std::unordered_set<std::string_view> seen;
  for (std::size_t i = 0; i < hits_.size(); ++i) {
    const Hit& h = hits_[i];
    if (h.rank != i + 1) {
      throw Error(ErrorCode::invariant, "retrieval for '" + qid_ + "': hit " +
                                            std::to_string(i + 1) + " has rank " +
                                            std::to_string(h.rank));
    }
    if (i > 0 && h.score > hits_[i - 1].score) {
      throw Error(ErrorCode::invariant,
                  "retrieval for '" + qid_ + "': score increases at rank " +
                      std::to_string(h.rank));
    }
    if (!seen.insert(h.pid).second) {
      throw Error(ErrorCode::invariant,
                  "retrieval for '" + qid_ + "': duplicate pid '" + h.pid + "'");
    }
  }
}

std::string_view to_string(Provenance p) {
  return p == Provenance::translation ? "translation" : "similarity";
}

Provenance parse_provenance(std::string_view s) {
  if (s == "translation") return Provenance::translation;
  if (s == "similarity") return Provenance::similarity;
  throw Error(ErrorCode::parse, "unknown provenance '" + std::string(s) + "'");
}

const GroupMember* QuestionGroup::find_language(const LanguageCode& lang) const {
  for (const auto& m : members) {
    if (m.lang == lang) return &m;
  }
  return nullptr;
}

void validate_group(const QuestionGroup& group, double min_cosine) {
  const std::string where = "group '" + group.group_id + "'";
  if (group.group_id.empty()) {
    throw Error(ErrorCode::invariant, "group with empty group_id");
  }
  if (group.members.size() < 2) {
    throw Error(ErrorCode::invariant, where + " has fewer than 2 members");
  }
  std::set<LanguageCode> langs;
  std::unordered_set<std::string_view> qids;
  for (const auto& m : group.members) {
    if (!langs.insert(m.lang).second) {
      throw Error(ErrorCode::invariant,
                  where + " has more than one member in language '" + m.lang.str() + "'");
    }
    if (!qids.insert(m.qid).second) {
      throw Error(ErrorCode::invariant, where + " lists qid '" + m.qid + "' twice");
    }
    if (m.provenance == Provenance::similarity) {
      if (!m.cosine) {
        throw Error(ErrorCode::invariant,
                    where + ": similarity member '" + m.qid + "' has no cosine");
      }
      if (*m.cosine < min_cosine) {
        throw Error(ErrorCode::invariant, where + ": similarity member '" + m.qid +
                                              "' cosine below threshold");
      }
    }
  }
}

std::string_view to_string(ErrorType t) {
  switch (t) {
    case ErrorType::translation_issue: return "translation_issue";
    case ErrorType::retriever_issue: return "retriever_issue";
    case ErrorType::answer_extractor_issue: return "answer_extractor_issue";
    case ErrorType::inconsistent_facts: return "inconsistent_facts";
    case ErrorType::granularity_mismatch: return "granularity_mismatch";
    case ErrorType::unrelated_context: return "unrelated_context";
    case ErrorType::related_no_answer: return "related_no_answer";
  }
  return "";
}

const std::vector<ErrorType>& all_error_types() {
  static const std::vector<ErrorType> kAll = {
      ErrorType::translation_issue,  ErrorType::retriever_issue,
      ErrorType::answer_extractor_issue, ErrorType::inconsistent_facts,
      ErrorType::granularity_mismatch, ErrorType::unrelated_context,
      ErrorType::related_no_answer};
  return kAll;
}

ErrorType parse_error_type(std::string_view s) {
  for (ErrorType t : all_error_types()) {
    if (to_string(t) == s) return t;
  }
  throw Error(ErrorCode::parse, "unknown error_type '" + std::string(s) + "'");
}

}  // namespace xlqa
