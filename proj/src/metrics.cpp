#include "xlqa/metrics.hpp"

#include <cstdint>
#include <unordered_map>

#include <unicode/uchar.h>
#include <unicode/uscript.h>
#include <unicode/utf8.h>

#include "jsonl.hpp"
#include "xlqa/error.hpp"

namespace xlqa {

namespace {

constexpr UChar32 kReplacement = 0xFFFD;

template <class Fn>
void for_each_code_point(std::string_view s, Fn&& fn) {
  const auto* p = reinterpret_cast<const std::uint8_t*>(s.data());
  const auto n = static_cast<std::int32_t>(s.size());
  std::int32_t i = 0;
  while (i < n) {
    UChar32 c;
    U8_NEXT(p, i, n, c);
    fn(c < 0 ? kReplacement : c);
  }
}

void append_utf8(std::string& out, UChar32 c) {
  char buf[U8_MAX_LENGTH];
  std::int32_t len = 0;
  UBool error = false;
  U8_APPEND(reinterpret_cast<std::uint8_t*>(buf), len, U8_MAX_LENGTH, c, error);
  if (error) return;
  out.append(buf, static_cast<std::size_t>(len));
}

bool is_punctuation(UChar32 c) { return (U_GET_GC_MASK(c) & U_GC_P_MASK) != 0; }

bool is_space_free_script(UChar32 c) {
  UErrorCode status = U_ZERO_ERROR;
  const UScriptCode script = uscript_getScript(c, &status);
  if (U_FAILURE(status)) return false;
  switch (script) {
    case USCRIPT_HAN:
    case USCRIPT_HIRAGANA:
    case USCRIPT_KATAKANA:
    case USCRIPT_THAI:
    case USCRIPT_LAO:
    case USCRIPT_KHMER:
    case USCRIPT_MYANMAR:
      return true;
    default:
      return false;
  }
}

std::vector<std::string> split_whitespace(std::string_view s) {
  std::vector<std::string> tokens;
  std::string current;
  for_each_code_point(s, [&](UChar32 c) {
    if (u_isUWhiteSpace(c)) {
      if (!current.empty()) tokens.push_back(std::move(current));
      current.clear();
    } else {
      append_utf8(current, c);
    }
  });
  if (!current.empty()) tokens.push_back(std::move(current));
  return tokens;
}

}  // namespace

const Segmenter* Segmenters::find(const LanguageCode& lang) const {
  auto it = by_lang_.find(lang);
  return it == by_lang_.end() ? nullptr : &it->second;
}

const Segmenters& Segmenters::defaults() {
  static const Segmenters kDefaults = [] {
    Segmenters s;
    s.set(LanguageCode::parse("zh"), segment_code_points);
    return s;
  }();
  return kDefaults;
}

std::vector<std::string> segment_code_points(std::string_view normalized) {
  std::vector<std::string> tokens;
  std::string current;
  auto flush = [&] {
    if (!current.empty()) tokens.push_back(std::move(current));
    current.clear();
  };
  for_each_code_point(normalized, [&](UChar32 c) {
    if (u_isUWhiteSpace(c)) {
      flush();
    } else if (is_space_free_script(c)) {
      flush();
      append_utf8(current, c);
      flush();
    } else {
      append_utf8(current, c);
    }
  });
  flush();
  return tokens;
}

std::vector<std::string> normalize_and_tokenize(std::string_view text, const LanguageCode& lang,
                                                const Segmenters& segmenters) {
  std::string folded;
  folded.reserve(text.size());
  for_each_code_point(text, [&](UChar32 c) {
    if (is_punctuation(c)) return;
    append_utf8(folded, u_foldCase(c, U_FOLD_CASE_DEFAULT));
  });

  std::vector<std::string> tokens;
  if (const Segmenter* seg = segmenters.find(lang)) {
    tokens = (*seg)(folded);
    std::erase_if(tokens, [](const std::string& t) { return t.empty(); });
  } else {
    tokens = split_whitespace(folded);
  }
  return tokens;
}

double token_f1_tokens(std::span<const std::string> prediction,
                       std::span<const std::string> gold) {
  if (prediction.empty() && gold.empty()) return 1.0;
  if (prediction.empty() || gold.empty()) return 0.0;

  std::unordered_map<std::string_view, std::size_t> gold_counts;
  for (const auto& t : gold) ++gold_counts[t];
  std::size_t overlap = 0;
  for (const auto& t : prediction) {
    auto it = gold_counts.find(t);
    if (it != gold_counts.end() && it->second > 0) {
      --it->second;
      ++overlap;
    }
  }
  if (overlap == 0) return 0.0;
  const double precision = static_cast<double>(overlap) / static_cast<double>(prediction.size());
  const double recall = static_cast<double>(overlap) / static_cast<double>(gold.size());
  return 2.0 * precision * recall / (precision + recall);
}

double token_f1(std::string_view prediction, std::span<const std::string> golds,
                const LanguageCode& lang, const Segmenters& segmenters) {
  const auto pred = normalize_and_tokenize(prediction, lang, segmenters);
  double best = 0.0;
  for (const auto& g : golds) {
    best = std::max(best, token_f1_tokens(pred, normalize_and_tokenize(g, lang, segmenters)));
  }
  return best;
}

int exact_match(std::string_view prediction, std::span<const std::string> golds,
                const LanguageCode& lang, const Segmenters& segmenters) {
  const auto pred = normalize_and_tokenize(prediction, lang, segmenters);
  for (const auto& g : golds) {
    if (normalize_and_tokenize(g, lang, segmenters) == pred) return 1;
  }
  return 0;
}

double mean_token_f1(std::span<const ScoringInput> records, const Segmenters& segmenters) {
  if (records.empty()) {
    throw Error(ErrorCode::invalid_argument, "mean token F1 of an empty record list");
  }
  double sum = 0.0;
  for (const auto& r : records) sum += token_f1(r.prediction, r.golds, r.lang, segmenters);
  return sum / static_cast<double>(records.size());
}

std::vector<ScoreRecord> score_answers(const std::vector<AnswerRecord>& answers,
                                       const QuestionSet& questions,
                                       const Segmenters& segmenters) {
  std::vector<ScoreRecord> out;
  out.reserve(answers.size());
  for (const auto& a : answers) {
    const Question* q = questions.find(a.qid);
    if (!q) {
      throw Error(ErrorCode::not_found, "answer for unknown question '" + a.qid + "'");
    }
    ScoreRecord s;
    s.qid = a.qid;
    s.lang = q->lang;
    s.no_gold = q->gold_answers.empty();
    s.f1 = token_f1(a.answer, q->gold_answers, q->lang, segmenters);
    s.em = exact_match(a.answer, q->gold_answers, q->lang, segmenters);
    out.push_back(std::move(s));
  }
  return out;
}

ScoreSummary summarize_scores(std::span<const ScoreRecord> scores) {
  if (scores.empty()) throw Error(ErrorCode::invalid_argument, "no scores to summarize");
  ScoreSummary s;
  s.count = scores.size();
  double f1 = 0.0;
  double em = 0.0;
  for (const auto& r : scores) {
    f1 += r.f1;
    em += r.em;
  }
  s.mean_f1 = f1 / static_cast<double>(s.count);
  s.mean_em = em / static_cast<double>(s.count);
  return s;
}

std::vector<ScoreRecord> read_scores(std::istream& in, std::string_view source) {
  std::vector<ScoreRecord> out;
  const LanguageSet any = LanguageSet::any();
  detail::for_each_json_line(in, source, [&](const detail::Json& j, std::size_t) {
    ScoreRecord s;
    s.qid = detail::get_string(j, "qid");
    s.lang = detail::get_language(j, "lang", any);
    s.f1 = detail::get_double(j, "f1");
    if (s.f1 < 0.0 || s.f1 > 1.0) throw Error(ErrorCode::invariant, "f1 outside [0, 1]");
    const std::size_t em = detail::get_size(j, "em");
    if (em > 1) throw Error(ErrorCode::invariant, "em must be 0 or 1");
    s.em = static_cast<int>(em);
    s.no_gold = detail::get_bool(j, "no_gold");
    out.push_back(std::move(s));
  });
  return out;
}

void write_scores(std::ostream& out, std::span<const ScoreRecord> scores) {
  for (const auto& s : scores) {
    detail::write_json_line(out, detail::Json{{"qid", s.qid},
                                              {"lang", s.lang.str()},
                                              {"f1", s.f1},
                                              {"em", s.em},
                                              {"no_gold", s.no_gold}});
  }
}

}  // namespace xlqa
