#include "xlqa/pairing.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <map>
#include <set>

#include "csv.hpp"
#include "jsonl.hpp"
#include "xlqa/error.hpp"
#include "xlqa/index.hpp"

namespace xlqa {

namespace {

double norm(std::span<const float> v) { return std::sqrt(dot(v, v)); }

double cosine_from(double dot_uv, double norm_u, double norm_v) {
  return std::clamp(dot_uv / (norm_u * norm_v), -1.0, 1.0);
}

struct PoolEntry {
  const Question* question;
  std::span<const float> vec;
  double norm;
};

std::vector<PoolEntry> resolve_pool(const QuestionPool& pool, const char* side) {
  if (!pool.questions || !pool.embeddings) {
    throw Error(ErrorCode::invalid_argument, std::string(side) + " pool is incomplete");
  }
  std::vector<PoolEntry> out;
  out.reserve(pool.questions->size());
  for (const auto& q : pool.questions->questions()) {
    auto row = pool.embeddings->find(q.qid);
    if (!row) {
      throw Error(ErrorCode::not_found, "question '" + q.qid + "' has no embedding");
    }
    auto vec = pool.embeddings->row(*row);
    const double n = norm(vec);
    if (n == 0.0) {
      throw Error(ErrorCode::invalid_argument,
                  "question '" + q.qid + "' has a zero embedding (cosine undefined)");
    }
    out.push_back(PoolEntry{&q, vec, n});
  }
  std::sort(out.begin(), out.end(), [](const PoolEntry& a, const PoolEntry& b) {
    return a.question->qid < b.question->qid;
  });
  return out;
}

}  // namespace

double cosine_similarity(std::span<const float> u, std::span<const float> v) {
  if (u.size() != v.size()) {
    throw Error(ErrorCode::dimension_mismatch, "cosine of vectors with dims " +
                                                   std::to_string(u.size()) + " and " +
                                                   std::to_string(v.size()));
  }
  const double nu = norm(u);
  const double nv = norm(v);
  if (nu == 0.0 || nv == 0.0) {
    throw Error(ErrorCode::invalid_argument, "cosine similarity with a zero vector is undefined");
  }
  return cosine_from(dot(u, v), nu, nv);
}

QuestionSet select_language(const QuestionSet& questions, const LanguageCode& lang) {
  QuestionSet out;
  for (const auto& q : questions.questions()) {
    if (q.lang == lang) out.add(q);
  }
  return out;
}

std::vector<QuestionGroup> mine_pairs(const QuestionPool& src, const QuestionPool& dst,
                                      double threshold) {
  const auto src_entries = resolve_pool(src, "src");
  const auto dst_entries = resolve_pool(dst, "dst");
  if (src.embeddings->dim() != dst.embeddings->dim()) {
    throw Error(ErrorCode::dimension_mismatch,
                "src embeddings dim " + std::to_string(src.embeddings->dim()) +
                    " does not match dst embeddings dim " + std::to_string(dst.embeddings->dim()));
  }

  std::vector<QuestionGroup> groups;
  std::set<std::string> emitted;
  for (const auto& s : src_entries) {
    for (const auto& d : dst_entries) {
      if (s.question->qid == d.question->qid || s.question->lang == d.question->lang) continue;
      const double cos = cosine_from(dot(s.vec, d.vec), s.norm, d.norm);
      if (!(cos > threshold)) continue;
      const auto& [lo, hi] = std::minmax(s.question->qid, d.question->qid);
      std::string id = "sim:" + lo + "|" + hi;
      if (!emitted.insert(id).second) continue;
      QuestionGroup g;
      g.group_id = std::move(id);
      g.members.push_back(
          GroupMember{s.question->qid, s.question->lang, Provenance::similarity, cos});
      g.members.push_back(
          GroupMember{d.question->qid, d.question->lang, Provenance::similarity, cos});
      groups.push_back(std::move(g));
    }
  }
  return groups;
}

std::vector<QuestionGroup> ingest_translation_pairs(std::istream& in, const IngestOptions& opts,
                                                    std::string_view source) {
  auto groups = read_groups(in, opts, source);
  for (const auto& g : groups) {
    for (const auto& m : g.members) {
      if (m.provenance != Provenance::translation) {
        throw Error(ErrorCode::invariant, "group '" + g.group_id + "' member '" + m.qid +
                                              "' is not a translation");
      }
    }
  }
  return groups;
}

std::vector<QuestionGroup> ingest_translation_pairs(const std::filesystem::path& path,
                                                    const IngestOptions& opts) {
  auto in = detail::open_input(path);
  return ingest_translation_pairs(in, opts, path.string());
}

// --- BLEU -----------------------------------------------------------------

namespace {

using NgramCounts = std::map<std::vector<std::string_view>, std::size_t>;

NgramCounts count_ngrams(std::span<const std::string> tokens, std::size_t n) {
  NgramCounts counts;
  if (tokens.size() < n) return counts;
  for (std::size_t i = 0; i + n <= tokens.size(); ++i) {
    std::vector<std::string_view> gram(tokens.begin() + static_cast<std::ptrdiff_t>(i),
                                       tokens.begin() + static_cast<std::ptrdiff_t>(i + n));
    ++counts[std::move(gram)];
  }
  return counts;
}

}  // namespace

BleuScore sentence_bleu_tokens(std::span<const std::string> candidate,
                               std::span<const std::string> reference) {
  if (candidate.empty() || reference.empty()) return BleuScore{0.0, true};

  const std::size_t max_order = std::min<std::size_t>(4, candidate.size());
  double log_sum = 0.0;
  for (std::size_t n = 1; n <= max_order; ++n) {
    const auto cand = count_ngrams(candidate, n);
    const auto ref = count_ngrams(reference, n);
    std::size_t matched = 0;
    for (const auto& [gram, count] : cand) {
      auto it = ref.find(gram);
      if (it != ref.end()) matched += std::min(count, it->second);
    }
    if (n == 1 && matched == 0) return BleuScore{0.0, false};
    const double total = static_cast<double>(candidate.size() - n + 1);
    const double numerator = matched == 0 ? kBleuEpsilon : static_cast<double>(matched);
    log_sum += std::log(numerator / total);
  }
  const double c = static_cast<double>(candidate.size());
  const double r = static_cast<double>(reference.size());
  const double brevity = c > r ? 1.0 : std::exp(1.0 - r / c);
  return BleuScore{brevity * std::exp(log_sum / static_cast<double>(max_order)), false};
}

BleuScore sentence_bleu(std::string_view candidate, std::string_view reference,
                        const LanguageCode& lang, const Segmenters& segmenters) {
  const auto cand = normalize_and_tokenize(candidate, lang, segmenters);
  const auto ref = normalize_and_tokenize(reference, lang, segmenters);
  return sentence_bleu_tokens(cand, ref);
}

// --- correlation ----------------------------------------------------------

double pearson_correlation(std::span<const double> xs, std::span<const double> ys) {
  if (xs.size() != ys.size()) {
    throw Error(ErrorCode::invalid_argument, "pearson correlation of unequal-length samples");
  }
  if (xs.size() < 2) {
    throw Error(ErrorCode::invalid_argument, "pearson correlation needs at least 2 points");
  }
  const auto constant = [](std::span<const double> v) {
    return std::all_of(v.begin(), v.end(), [&](double x) { return x == v.front(); });
  };
  if (constant(xs) || constant(ys)) {
    throw Error(ErrorCode::invalid_argument, "pearson correlation with zero variance");
  }
  const double n = static_cast<double>(xs.size());
  double mx = 0.0;
  double my = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0.0;
  double sxx = 0.0;
  double syy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double dx = xs[i] - mx;
    const double dy = ys[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0.0 || syy == 0.0) {
    throw Error(ErrorCode::invalid_argument, "pearson correlation with zero variance");
  }
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

// --- pair validation ------------------------------------------------------

std::vector<PairMetric> pair_metrics(const std::vector<QuestionGroup>& groups,
                                     const QuestionSet& questions,
                                     const QuestionSet& translations,
                                     const Segmenters& segmenters) {
  std::vector<PairMetric> out;
  out.reserve(groups.size());
  for (const auto& g : groups) {
    if (g.members.size() != 2) {
      throw Error(ErrorCode::invariant, "group '" + g.group_id + "' is not a pair");
    }
    const GroupMember& src = g.members[0];
    const GroupMember& dst = g.members[1];
    const Question* src_q = questions.find(src.qid);
    if (!src_q) throw Error(ErrorCode::not_found, "unknown question '" + src.qid + "'");
    const Question* translated = translations.find(dst.qid);
    if (!translated) {
      throw Error(ErrorCode::not_found, "no translation for question '" + dst.qid + "'");
    }
    const double cos = src.cosine.value_or(dst.cosine.value_or(0.0));
    const BleuScore bleu =
        sentence_bleu(translated->text, src_q->text, src_q->lang, segmenters);
    out.push_back(PairMetric{src.qid, dst.qid, cos, bleu.value});
  }
  return out;
}

std::optional<double> cosine_bleu_correlation(std::span<const PairMetric> metrics) {
  std::vector<double> xs;
  std::vector<double> ys;
  for (const auto& m : metrics) {
    xs.push_back(m.cosine);
    ys.push_back(m.bleu);
  }
  try {
    return pearson_correlation(xs, ys);
  } catch (const Error&) {
    return std::nullopt;
  }
}

void write_pair_metrics(std::ostream& out, std::span<const PairMetric> metrics) {
  detail::write_csv_row(out, {"src_qid", "dst_qid", "cosine", "bleu"});
  for (const auto& m : metrics) {
    detail::write_csv_row(out, {m.src_qid, m.dst_qid, detail::format_double(m.cosine),
                                detail::format_double(m.bleu)});
  }
}

namespace {

double parse_double_field(const std::string& s, std::size_t row) {
  double v = 0.0;
  const auto* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc{} || ptr != end) {
    throw Error(ErrorCode::parse, "row " + std::to_string(row) + ": bad number '" + s + "'");
  }
  return v;
}

}  // namespace

std::vector<PairMetric> read_pair_metrics(std::istream& in) {
  std::vector<std::string> fields;
  if (!detail::read_csv_row(in, fields) ||
      fields != std::vector<std::string>{"src_qid", "dst_qid", "cosine", "bleu"}) {
    throw Error(ErrorCode::parse, "pair metrics: missing or wrong header");
  }
  std::vector<PairMetric> out;
  std::size_t row = 1;
  while (detail::read_csv_row(in, fields)) {
    ++row;
    if (fields.size() != 4) {
      throw Error(ErrorCode::parse, "pair metrics row " + std::to_string(row) + ": expected 4 fields");
    }
    out.push_back(PairMetric{fields[0], fields[1], parse_double_field(fields[2], row),
                             parse_double_field(fields[3], row)});
  }
  return out;
}

}  // namespace xlqa
