#include "xlqa/records.hpp"

#include <set>
#include <unordered_set>

#include "jsonl.hpp"

namespace xlqa {

using detail::Json;

void PassageCorpus::add(Passage p) {
  if (p.pid.empty()) throw Error(ErrorCode::invalid_argument, "empty pid");
  if (p.text.empty()) {
    throw Error(ErrorCode::invalid_argument, "passage '" + p.pid + "' has empty text");
  }
  auto [it, inserted] = by_pid_.emplace(p.pid, passages_.size());
  if (!inserted) throw Error(ErrorCode::duplicate, "duplicate pid '" + p.pid + "'");
  passages_.push_back(std::move(p));
}

const Passage* PassageCorpus::find(std::string_view pid) const {
  auto it = by_pid_.find(std::string(pid));
  return it == by_pid_.end() ? nullptr : &passages_[it->second];
}

void QuestionSet::add(Question q) {
  if (q.qid.empty()) throw Error(ErrorCode::invalid_argument, "empty qid");
  auto [it, inserted] = by_qid_.emplace(q.qid, questions_.size());
  if (!inserted) throw Error(ErrorCode::duplicate, "duplicate qid '" + q.qid + "'");
  questions_.push_back(std::move(q));
}

const Question* QuestionSet::find(std::string_view qid) const {
  auto it = by_qid_.find(std::string(qid));
  return it == by_qid_.end() ? nullptr : &questions_[it->second];
}

// --- passages -------------------------------------------------------------

PassageCorpus read_passages(std::istream& in, const IngestOptions& opts,
                            std::string_view source) {
  PassageCorpus corpus;
  detail::for_each_json_line(in, source, [&](const Json& j, std::size_t) {
    corpus.add(Passage{detail::get_string(j, "pid"),
                       detail::get_language(j, "lang", opts.languages),
                       detail::get_string(j, "title"), detail::get_string(j, "text")});
  });
  return corpus;
}

PassageCorpus load_passages(const std::filesystem::path& path, const IngestOptions& opts) {
  auto in = detail::open_input(path);
  return read_passages(in, opts, path.string());
}

void write_passages(std::ostream& out, const PassageCorpus& corpus) {
  for (const auto& p : corpus.passages()) {
    detail::write_json_line(
        out, Json{{"pid", p.pid}, {"lang", p.lang.str()}, {"title", p.title}, {"text", p.text}});
  }
}

// --- questions ------------------------------------------------------------

QuestionSet read_questions(std::istream& in, const IngestOptions& opts,
                           std::string_view source) {
  QuestionSet set;
  detail::for_each_json_line(in, source, [&](const Json& j, std::size_t) {
    Question q;
    q.qid = detail::get_string(j, "qid");
    q.lang = detail::get_language(j, "lang", opts.languages);
    q.text = detail::get_string(j, "text");
    if (j.contains("gold_answers")) q.gold_answers = detail::get_string_array(j, "gold_answers");
    q.group_id = detail::get_optional_string(j, "group_id");
    set.add(std::move(q));
  });
  return set;
}

QuestionSet load_questions(const std::filesystem::path& path, const IngestOptions& opts) {
  auto in = detail::open_input(path);
  return read_questions(in, opts, path.string());
}

void write_questions(std::ostream& out, const QuestionSet& questions) {
  for (const auto& q : questions.questions()) {
    Json j{{"qid", q.qid}, {"lang", q.lang.str()}, {"text", q.text},
           {"gold_answers", q.gold_answers}};
    if (q.group_id) j["group_id"] = *q.group_id;
    detail::write_json_line(out, j);
  }
}

// --- groups ---------------------------------------------------------------

std::vector<QuestionGroup> read_groups(std::istream& in, const IngestOptions& opts,
                                       std::string_view source) {
  std::vector<QuestionGroup> groups;
  std::unordered_set<std::string> ids;
  detail::for_each_json_line(in, source, [&](const Json& j, std::size_t) {
    QuestionGroup g;
    g.group_id = detail::get_string(j, "group_id");
    for (const auto& m : detail::get_array(j, "members")) {
      if (!m.is_object()) throw Error(ErrorCode::parse, "group member is not an object");
      GroupMember member;
      member.qid = detail::get_string(m, "qid");
      member.lang = detail::get_language(m, "lang", opts.languages);
      member.provenance = parse_provenance(detail::get_string(m, "provenance"));
      member.cosine = detail::get_optional_double(m, "cosine");
      g.members.push_back(std::move(member));
    }
    validate_group(g, opts.min_cosine);
    if (!ids.insert(g.group_id).second) {
      throw Error(ErrorCode::duplicate, "duplicate group_id '" + g.group_id + "'");
    }
    groups.push_back(std::move(g));
  });
  return groups;
}

std::vector<QuestionGroup> load_groups(const std::filesystem::path& path,
                                       const IngestOptions& opts) {
  auto in = detail::open_input(path);
  return read_groups(in, opts, path.string());
}

void write_groups(std::ostream& out, const std::vector<QuestionGroup>& groups) {
  for (const auto& g : groups) {
    Json members = Json::array();
    for (const auto& m : g.members) {
      Json jm{{"qid", m.qid}, {"lang", m.lang.str()},
              {"provenance", std::string(to_string(m.provenance))}};
      if (m.cosine) jm["cosine"] = *m.cosine;
      members.push_back(std::move(jm));
    }
    detail::write_json_line(out, Json{{"group_id", g.group_id}, {"members", std::move(members)}});
  }
}

// --- answers --------------------------------------------------------------

std::vector<AnswerRecord> read_answers(std::istream& in, const IngestOptions& opts,
                                       std::string_view source) {
  std::vector<AnswerRecord> answers;
  std::unordered_set<std::string> qids;
  detail::for_each_json_line(in, source, [&](const Json& j, std::size_t) {
    AnswerRecord a{detail::get_string(j, "qid"),
                   detail::get_language(j, "lang", opts.languages),
                   detail::get_string(j, "context_pid"), detail::get_string(j, "answer")};
    if (!qids.insert(a.qid).second) {
      throw Error(ErrorCode::duplicate, "duplicate answer for qid '" + a.qid + "'");
    }
    answers.push_back(std::move(a));
  });
  return answers;
}

std::vector<AnswerRecord> load_answers(const std::filesystem::path& path,
                                       const IngestOptions& opts) {
  auto in = detail::open_input(path);
  return read_answers(in, opts, path.string());
}

void write_answers(std::ostream& out, const std::vector<AnswerRecord>& answers) {
  for (const auto& a : answers) {
    detail::write_json_line(out, Json{{"qid", a.qid},
                                      {"lang", a.lang.str()},
                                      {"context_pid", a.context_pid},
                                      {"answer", a.answer}});
  }
}

// --- error labels ---------------------------------------------------------

std::vector<ErrorLabel> read_labels(std::istream& in, const IngestOptions& opts,
                                    std::string_view source) {
  std::vector<ErrorLabel> labels;
  detail::for_each_json_line(in, source, [&](const Json& j, std::size_t) {
    ErrorLabel l;
    l.group_id = detail::get_string(j, "group_id");
    l.error_type = parse_error_type(detail::get_string(j, "error_type"));
    l.note = detail::get_optional_string(j, "note").value_or("");
    if (j.contains("lang")) l.lang = detail::get_language(j, "lang", opts.languages);
    labels.push_back(std::move(l));
  });
  return labels;
}

std::vector<ErrorLabel> load_labels(const std::filesystem::path& path,
                                    const IngestOptions& opts) {
  auto in = detail::open_input(path);
  return read_labels(in, opts, path.string());
}

void write_labels(std::ostream& out, const std::vector<ErrorLabel>& labels) {
  for (const auto& l : labels) {
    Json j{{"group_id", l.group_id},
           {"error_type", std::string(to_string(l.error_type))},
           {"note", l.note}};
    if (l.lang) j["lang"] = l.lang->str();
    detail::write_json_line(out, j);
  }
}

// --- retrievals -----------------------------------------------------------

std::vector<RetrievalResult> read_retrievals(std::istream& in, std::string_view source) {
  std::vector<RetrievalResult> results;
  std::unordered_set<std::string> qids;
  detail::for_each_json_line(in, source, [&](const Json& j, std::size_t) {
    std::string qid = detail::get_string(j, "qid");
    std::vector<Hit> hits;
    for (const auto& h : detail::get_array(j, "hits")) {
      if (!h.is_object()) throw Error(ErrorCode::parse, "hit is not an object");
      hits.push_back(Hit{detail::get_string(h, "pid"), detail::get_double(h, "score"),
                         detail::get_size(h, "rank")});
    }
    if (!qids.insert(qid).second) {
      throw Error(ErrorCode::duplicate, "duplicate retrieval for qid '" + qid + "'");
    }
    results.emplace_back(std::move(qid), std::move(hits));
  });
  return results;
}

std::vector<RetrievalResult> load_retrievals(const std::filesystem::path& path) {
  auto in = detail::open_input(path);
  return read_retrievals(in, path.string());
}

void write_retrievals(std::ostream& out, const std::vector<RetrievalResult>& results) {
  for (const auto& r : results) {
    Json hits = Json::array();
    for (const auto& h : r.hits()) {
      hits.push_back(Json{{"pid", h.pid}, {"score", h.score}, {"rank", h.rank}});
    }
    detail::write_json_line(out, Json{{"qid", r.qid()}, {"hits", std::move(hits)}});
  }
}

// --- cross-file checks ----------------------------------------------------

void validate_group_references(const QuestionSet& questions,
                               const std::vector<QuestionGroup>& groups) {
  std::unordered_set<std::string_view> group_ids;
  for (const auto& g : groups) {
    group_ids.insert(g.group_id);
    for (const auto& m : g.members) {
      const Question* q = questions.find(m.qid);
      if (!q) {
        throw Error(ErrorCode::not_found,
                    "group '" + g.group_id + "' member '" + m.qid + "' is not a known question");
      }
      if (q->lang != m.lang) {
        throw Error(ErrorCode::invariant, "group '" + g.group_id + "' member '" + m.qid +
                                              "' language '" + m.lang.str() +
                                              "' disagrees with question language '" +
                                              q->lang.str() + "'");
      }
    }
  }
  for (const auto& q : questions.questions()) {
    if (q.group_id && group_ids.count(*q.group_id) == 0) {
      throw Error(ErrorCode::not_found, "question '" + q.qid + "' references unknown group '" +
                                            *q.group_id + "'");
    }
  }
}

}  // namespace xlqa
