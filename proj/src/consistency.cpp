#include "xlqa/consistency.hpp"

#include <algorithm>
#include <numeric>
#include <set>

#include "jsonl.hpp"

namespace xlqa {

using detail::Json;

std::string_view to_string(SelectionMode mode) {
  return mode == SelectionMode::oracle ? "oracle" : "non-oracle";
}

SelectionMode parse_selection_mode(std::string_view s) {
  if (s == "oracle") return SelectionMode::oracle;
  if (s == "non-oracle" || s == "non_oracle") return SelectionMode::non_oracle;
  throw Error(ErrorCode::invalid_argument, "unknown mode '" + std::string(s) + "'");
}

std::size_t default_top_k(SelectionMode mode) {
  return mode == SelectionMode::oracle ? kOracleTopK : kNonOracleTopK;
}

std::string_view to_string(Containment c) {
  return c == Containment::per_language ? "per_language" : "any_language";
}

Containment parse_containment(std::string_view s) {
  if (s == "per_language") return Containment::per_language;
  if (s == "any_language") return Containment::any_language;
  throw Error(ErrorCode::invalid_argument, "unknown containment '" + std::string(s) + "'");
}

std::string_view to_string(GoldPolicy p) {
  return p == GoldPolicy::as_is ? "as_is" : "group_fallback";
}

GoldPolicy parse_gold_policy(std::string_view s) {
  if (s == "as_is") return GoldPolicy::as_is;
  if (s == "group_fallback") return GoldPolicy::group_fallback;
  throw Error(ErrorCode::invalid_argument, "unknown gold policy '" + std::string(s) + "'");
}

std::string_view to_string(DivergenceMode m) {
  return m == DivergenceMode::string ? "string" : "score";
}

namespace {

DivergenceMode parse_divergence_mode(std::string_view s) {
  if (s == "string") return DivergenceMode::string;
  if (s == "score") return DivergenceMode::score;
  throw Error(ErrorCode::parse, "unknown divergence mode '" + std::string(s) + "'");
}

std::string join_tokens(const std::vector<std::string>& tokens) {
  std::string out;
  for (const auto& t : tokens) {
    if (!out.empty()) out += ' ';
    out += t;
  }
  return out;
}

}  // namespace

// --- context selection ----------------------------------------------------

RetrievalLookup::RetrievalLookup(std::span<const RetrievalResult> results) {
  for (const auto& r : results) by_qid_.emplace(r.qid(), &r);
}

const RetrievalResult* RetrievalLookup::find(std::string_view qid) const {
  auto it = by_qid_.find(qid);
  return it == by_qid_.end() ? nullptr : it->second;
}

LanguageContexts select_in_language_context(const QuestionGroup& group,
                                            const RetrievalLookup& retrievals,
                                            const PassageCorpus& corpus, std::size_t top_k) {
  LanguageContexts out;
  for (const auto& m : group.members) {
    std::optional<ContextChoice> choice;
    if (const RetrievalResult* r = retrievals.find(m.qid)) {
      for (const Hit& h : r->hits()) {
        if (h.rank > top_k) break;
        const Passage* p = corpus.find(h.pid);
        if (!p) {
          throw Error(ErrorCode::not_found, "retrieved pid '" + h.pid + "' for question '" +
                                                m.qid + "' is not in the passage corpus");
        }
        if (!choice && p->lang == m.lang) {
          choice = ContextChoice{group.group_id, m.qid, m.lang, h.pid, h.score, h.rank};
        }
      }
    }
    out.emplace(m.lang, std::move(choice));
  }
  return out;
}

bool context_contains_gold(std::string_view context, std::span<const std::string> golds,
                           const LanguageCode& lang, const Segmenters& segmenters) {
  const std::string haystack = join_tokens(normalize_and_tokenize(context, lang, segmenters));
  for (const auto& g : golds) {
    const std::string needle = join_tokens(normalize_and_tokenize(g, lang, segmenters));
    if (!needle.empty() && haystack.find(needle) != std::string::npos) return true;
  }
  return false;
}

std::vector<SelectedGroup> oracle_filter(std::span<const QuestionGroup> groups,
                                         const RetrievalLookup& retrievals,
                                         const PassageCorpus& corpus, const QuestionSet& golds,
                                         std::size_t top_k, Containment containment,
                                         const Segmenters& segmenters) {
  const auto golds_of = [&](const std::string& qid) -> std::span<const std::string> {
    const Question* q = golds.find(qid);
    return q ? std::span<const std::string>(q->gold_answers) : std::span<const std::string>();
  };

  std::vector<SelectedGroup> retained;
  for (const auto& g : groups) {
    const LanguageContexts contexts = select_in_language_context(g, retrievals, corpus, top_k);

    std::vector<std::string> pooled;
    if (containment == Containment::any_language) {
      for (const auto& m : g.members) {
        auto gs = golds_of(m.qid);
        pooled.insert(pooled.end(), gs.begin(), gs.end());
      }
    }

    SelectedGroup kept;
    kept.group.group_id = g.group_id;
    for (const auto& m : g.members) {
      const auto& choice = contexts.at(m.lang);
      if (!choice) continue;
      const Passage* p = corpus.find(choice->pid);
      const auto member_golds =
          containment == Containment::per_language ? golds_of(m.qid) : std::span(pooled);
      if (!context_contains_gold(p->text, member_golds, m.lang, segmenters)) continue;
      kept.group.members.push_back(m);
      kept.contexts.emplace(m.lang, *choice);
    }
    if (kept.group.members.size() >= 2) retained.push_back(std::move(kept));
  }
  return retained;
}

std::vector<SelectedGroup> non_oracle_select(std::span<const QuestionGroup> groups,
                                             const RetrievalLookup& retrievals,
                                             const PassageCorpus& corpus, std::size_t top_k) {
  std::vector<SelectedGroup> out;
  out.reserve(groups.size());
  for (const auto& g : groups) {
    SelectedGroup s;
    s.group = g;
    for (auto& [lang, choice] : select_in_language_context(g, retrievals, corpus, top_k)) {
      if (choice) s.contexts.emplace(lang, std::move(*choice));
    }
    out.push_back(std::move(s));
  }
  return out;
}

std::vector<ContextChoice> flatten_contexts(std::span<const SelectedGroup> groups) {
  std::vector<ContextChoice> out;
  for (const auto& g : groups) {
    for (const auto& m : g.group.members) {
      auto it = g.contexts.find(m.lang);
      if (it != g.contexts.end()) out.push_back(it->second);
    }
  }
  return out;
}

void write_contexts(std::ostream& out, std::span<const ContextChoice> contexts) {
  for (const auto& c : contexts) {
    detail::write_json_line(out, Json{{"group_id", c.group_id},
                                      {"qid", c.qid},
                                      {"lang", c.lang.str()},
                                      {"pid", c.pid},
                                      {"score", c.score},
                                      {"rank", c.rank}});
  }
}

std::vector<ContextChoice> read_contexts(std::istream& in, std::string_view source) {
  std::vector<ContextChoice> out;
  const LanguageSet any = LanguageSet::any();
  detail::for_each_json_line(in, source, [&](const Json& j, std::size_t) {
    ContextChoice c{detail::get_string(j, "group_id"), detail::get_string(j, "qid"),
                    detail::get_language(j, "lang", any), detail::get_string(j, "pid"),
                    detail::get_double(j, "score"), detail::get_size(j, "rank")};
    if (c.rank == 0) throw Error(ErrorCode::invariant, "rank must be at least 1");
    out.push_back(std::move(c));
  });
  return out;
}

// --- consistency matrix ---------------------------------------------------

ConsistencyMatrix::ConsistencyMatrix(std::vector<MatrixRow> rows) : rows_(std::move(rows)) {
  std::set<LanguageCode> columns;
  for (const auto& row : rows_) {
    if (!std::is_sorted(row.languages.begin(), row.languages.end()) ||
        std::adjacent_find(row.languages.begin(), row.languages.end()) != row.languages.end()) {
      throw Error(ErrorCode::invariant,
                  "row '" + row.group_id + "' languages must be sorted and distinct");
    }
    for (const auto& [lang, cell] : row.cells) {
      if (!std::binary_search(row.languages.begin(), row.languages.end(), lang)) {
        throw Error(ErrorCode::invariant, "row '" + row.group_id + "' has a cell for '" +
                                              lang.str() + "' outside its languages");
      }
      if (!(cell.f1 >= 0.0 && cell.f1 <= 1.0)) {
        throw Error(ErrorCode::invariant, "row '" + row.group_id + "' f1 outside [0, 1]");
      }
      if (cell.em != 0 && cell.em != 1) {
        throw Error(ErrorCode::invariant, "row '" + row.group_id + "' em must be 0 or 1");
      }
    }
    columns.insert(row.languages.begin(), row.languages.end());
  }
  columns_.assign(columns.begin(), columns.end());
}

ConsistencyMatrix build_consistency_matrix(std::span<const QuestionGroup> groups,
                                           std::span<const AnswerRecord> answers,
                                           const QuestionSet& golds, const WarningSink& warn,
                                           GoldPolicy policy, const Segmenters& segmenters) {
  std::unordered_map<std::string_view, const AnswerRecord*> by_qid;
  for (const auto& a : answers) {
    if (!by_qid.emplace(a.qid, &a).second) {
      throw Error(ErrorCode::duplicate, "duplicate answer for qid '" + a.qid + "'");
    }
  }

  std::set<std::string_view> member_qids;
  for (const auto& g : groups) {
    for (const auto& m : g.members) member_qids.insert(m.qid);
  }
  for (const auto& a : answers) {
    if (member_qids.count(a.qid) == 0 && warn) {
      warn("answer for qid '" + a.qid + "' belongs to no analyzed group; skipped");
    }
  }

  const auto golds_of = [&](const std::string& qid) {
    const Question* q = golds.find(qid);
    return q ? q->gold_answers : std::vector<std::string>{};
  };

  std::vector<MatrixRow> rows;
  rows.reserve(groups.size());
  for (const auto& g : groups) {
    MatrixRow row;
    row.group_id = g.group_id;
    for (const auto& m : g.members) row.languages.push_back(m.lang);
    std::sort(row.languages.begin(), row.languages.end());

    for (const auto& m : g.members) {
      auto it = by_qid.find(m.qid);
      if (it == by_qid.end()) continue;
      const AnswerRecord& a = *it->second;
      if (a.lang != m.lang) {
        throw Error(ErrorCode::invariant, "answer for qid '" + a.qid + "' is tagged '" +
                                              a.lang.str() + "' but its group member is '" +
                                              m.lang.str() + "'");
      }
      std::vector<std::string> gs = golds_of(m.qid);
      if (gs.empty() && policy == GoldPolicy::group_fallback) {
        for (const auto& other : g.members) {
          if (other.qid == m.qid) continue;
          auto more = golds_of(other.qid);
          gs.insert(gs.end(), more.begin(), more.end());
        }
      }
      MatrixCell cell;
      cell.answer = a.answer;
      cell.context_pid = a.context_pid;
      cell.no_gold = gs.empty();
      cell.f1 = token_f1(a.answer, gs, m.lang, segmenters);
      cell.em = exact_match(a.answer, gs, m.lang, segmenters);
      row.cells.emplace(m.lang, std::move(cell));
    }
    rows.push_back(std::move(row));
  }
  return ConsistencyMatrix(std::move(rows));
}

void write_matrix(std::ostream& out, const ConsistencyMatrix& matrix) {
  for (const auto& row : matrix.rows()) {
    Json langs = Json::array();
    for (const auto& l : row.languages) langs.push_back(l.str());
    Json cells = Json::array();
    for (const auto& [lang, c] : row.cells) {
      cells.push_back(Json{{"lang", lang.str()},
                           {"answer", c.answer},
                           {"f1", c.f1},
                           {"em", c.em},
                           {"context_pid", c.context_pid},
                           {"no_gold", c.no_gold}});
    }
    detail::write_json_line(out, Json{{"group_id", row.group_id},
                                      {"languages", std::move(langs)},
                                      {"cells", std::move(cells)}});
  }
}

ConsistencyMatrix read_matrix(std::istream& in, std::string_view source) {
  std::vector<MatrixRow> rows;
  const LanguageSet any = LanguageSet::any();
  detail::for_each_json_line(in, source, [&](const Json& j, std::size_t) {
    MatrixRow row;
    row.group_id = detail::get_string(j, "group_id");
    for (const auto& l : detail::get_array(j, "languages")) {
      if (!l.is_string()) throw Error(ErrorCode::parse, "languages must be strings");
      row.languages.push_back(LanguageCode::parse(l.get<std::string>()));
    }
    for (const auto& c : detail::get_array(j, "cells")) {
      if (!c.is_object()) throw Error(ErrorCode::parse, "cell is not an object");
      MatrixCell cell;
      const LanguageCode lang = detail::get_language(c, "lang", any);
      cell.answer = detail::get_string(c, "answer");
      cell.f1 = detail::get_double(c, "f1");
      cell.em = static_cast<int>(detail::get_size(c, "em"));
      cell.context_pid = detail::get_string(c, "context_pid");
      cell.no_gold = detail::get_bool(c, "no_gold");
      if (!row.cells.emplace(lang, std::move(cell)).second) {
        throw Error(ErrorCode::duplicate, "two cells for language '" + lang.str() + "'");
      }
    }
    // Validate the row now so the error carries its line number.
    (void)ConsistencyMatrix({row});
    rows.push_back(std::move(row));
  });
  return ConsistencyMatrix(std::move(rows));
}

bool row_is_inconsistent(const MatrixRow& row, DivergenceMode mode, double epsilon,
                         const Segmenters& segmenters) {
  if (row.cells.size() < 2) return false;
  if (mode == DivergenceMode::score) {
    auto [lo, hi] = std::minmax_element(
        row.cells.begin(), row.cells.end(),
        [](const auto& a, const auto& b) { return a.second.f1 < b.second.f1; });
    return hi->second.f1 - lo->second.f1 > epsilon;
  }
  std::optional<std::vector<std::string>> first;
  for (const auto& [lang, cell] : row.cells) {
    auto tokens = normalize_and_tokenize(cell.answer, lang, segmenters);
    if (!first) {
      first = std::move(tokens);
    } else if (tokens != *first) {
      return true;
    }
  }
  return false;
}

InconsistencyRate inconsistency_rate(const ConsistencyMatrix& matrix, DivergenceMode mode,
                                     double epsilon, const Segmenters& segmenters) {
  if (matrix.empty()) {
    throw Error(ErrorCode::invalid_argument, "inconsistency rate of an empty matrix");
  }
  InconsistencyRate r;
  r.mode = mode;
  r.epsilon = epsilon;
  r.total = matrix.rows().size();
  for (const auto& row : matrix.rows()) {
    if (row_is_inconsistent(row, mode, epsilon, segmenters)) ++r.count_inconsistent;
  }
  r.rate = static_cast<double>(r.count_inconsistent) / static_cast<double>(r.total);
  return r;
}

void write_rates(std::ostream& out, std::span<const InconsistencyRate> rates) {
  for (const auto& r : rates) {
    detail::write_json_line(out, Json{{"mode", std::string(to_string(r.mode))},
                                      {"epsilon", r.epsilon},
                                      {"count_inconsistent", r.count_inconsistent},
                                      {"total", r.total},
                                      {"rate", r.rate}});
  }
}

std::vector<InconsistencyRate> read_rates(std::istream& in, std::string_view source) {
  std::vector<InconsistencyRate> out;
  detail::for_each_json_line(in, source, [&](const Json& j, std::size_t) {
    InconsistencyRate r;
    r.mode = parse_divergence_mode(detail::get_string(j, "mode"));
    r.epsilon = detail::get_double(j, "epsilon");
    r.count_inconsistent = detail::get_size(j, "count_inconsistent");
    r.total = detail::get_size(j, "total");
    r.rate = detail::get_double(j, "rate");
    if (r.count_inconsistent > r.total) {
      throw Error(ErrorCode::invariant, "count_inconsistent exceeds total");
    }
    out.push_back(r);
  });
  return out;
}

// --- error taxonomy -------------------------------------------------------

std::size_t ErrorHistogram::total() const {
  return std::accumulate(overall.begin(), overall.end(), std::size_t{0});
}

ErrorHistogram error_distribution(std::span<const ErrorLabel> labels) {
  ErrorHistogram h;
  for (const auto& l : labels) {
    const auto i = static_cast<std::size_t>(l.error_type);
    ++h.overall[i];
    if (l.lang) ++h.per_language[*l.lang][i];
  }
  return h;
}

void write_histogram(std::ostream& out, const ErrorHistogram& h) {
  for (ErrorType t : all_error_types()) {
    detail::write_json_line(out, Json{{"error_type", std::string(to_string(t))},
                                      {"count", h.overall[static_cast<std::size_t>(t)]}});
  }
  for (const auto& [lang, counts] : h.per_language) {
    for (ErrorType t : all_error_types()) {
      detail::write_json_line(out, Json{{"lang", lang.str()},
                                        {"error_type", std::string(to_string(t))},
                                        {"count", counts[static_cast<std::size_t>(t)]}});
    }
  }
}

ErrorHistogram read_histogram(std::istream& in, std::string_view source) {
  ErrorHistogram h;
  const LanguageSet any = LanguageSet::any();
  std::set<std::pair<std::string, ErrorType>> seen;
  detail::for_each_json_line(in, source, [&](const Json& j, std::size_t) {
    const ErrorType t = parse_error_type(detail::get_string(j, "error_type"));
    const std::size_t count = detail::get_size(j, "count");
    std::optional<LanguageCode> lang;
    if (j.contains("lang")) lang = detail::get_language(j, "lang", any);
    if (!seen.emplace(lang ? lang->str() : std::string(), t).second) {
      throw Error(ErrorCode::duplicate, "repeated histogram entry");
    }
    auto& counts = lang ? h.per_language[*lang] : h.overall;
    counts[static_cast<std::size_t>(t)] = count;
  });
  return h;
}

}  // namespace xlqa
