#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "xlqa/embeddings.hpp"
#include "xlqa/metrics.hpp"
#include "xlqa/records.hpp"
#include "xlqa/types.hpp"

namespace xlqa {

inline constexpr double kDefaultPairThreshold = 0.7;

// dot(u, v) / (|u| |v|) in double precision, clamped to [-1, 1]. Throws on a
// zero vector or unequal dims.
double cosine_similarity(std::span<const float> u, std::span<const float> v);

/// Questions of one language subset together with their embeddings.
struct QuestionPool {
  const QuestionSet* questions = nullptr;
  const EmbeddingMatrix* embeddings = nullptr;
};

QuestionSet select_language(const QuestionSet& questions, const LanguageCode& lang);

// One two-member group per (src, dst) pair whose cosine is strictly above
// `threshold`, ordered by src qid then dst qid. Pairs of the same qid or the
// same language are skipped, and a pair already emitted in the opposite
// orientation is not repeated. Group ids are "sim:<qid>|<qid>" with the qids
// in byte order.
std::vector<QuestionGroup> mine_pairs(const QuestionPool& src, const QuestionPool& dst,
                                      double threshold = kDefaultPairThreshold);

// Reads translation groups; every member must carry provenance "translation".
std::vector<QuestionGroup> ingest_translation_pairs(std::istream& in,
                                                    const IngestOptions& opts = {},
                                                    std::string_view source = "<pairs>");
std::vector<QuestionGroup> ingest_translation_pairs(const std::filesystem::path& path,
                                                    const IngestOptions& opts = {});

struct BleuScore {
  double value = 0.0;
  // Set when either side tokenizes to nothing; value is then 0.
  bool degenerate = false;
};

inline constexpr double kBleuEpsilon = 0.1;

// Sentence BLEU with clipped n-gram precisions up to order 4, uniform weights,
// brevity penalty and +0.1 smoothing of zero match counts. The maximum order
// shrinks to the candidate length when it is shorter than 4, and a candidate
// with no unigram match scores 0.
BleuScore sentence_bleu(std::string_view candidate, std::string_view reference,
                        const LanguageCode& lang,
                        const Segmenters& segmenters = Segmenters::defaults());
BleuScore sentence_bleu_tokens(std::span<const std::string> candidate,
                               std::span<const std::string> reference);

// Sample Pearson correlation. Throws on unequal lengths, fewer than 2 points
// or zero variance.
double pearson_correlation(std::span<const double> xs, std::span<const double> ys);

struct PairMetric {
  std::string src_qid;
  std::string dst_qid;
  double cosine = 0.0;
  double bleu = 0.0;

  bool operator==(const PairMetric&) const = default;
};

// For each mined group: BLEU of the translated dst question (looked up by dst
// qid in `translations`) against the src question text, tokenized as the src
// language. The first member of each group is the src side.
std::vector<PairMetric> pair_metrics(const std::vector<QuestionGroup>& groups,
                                     const QuestionSet& questions,
                                     const QuestionSet& translations,
                                     const Segmenters& segmenters = Segmenters::defaults());

// Pearson r between cosine and BLEU; nullopt when undefined.
std::optional<double> cosine_bleu_correlation(std::span<const PairMetric> metrics);

// CSV with header src_qid,dst_qid,cosine,bleu.
void write_pair_metrics(std::ostream& out, std::span<const PairMetric> metrics);
std::vector<PairMetric> read_pair_metrics(std::istream& in);

}  // namespace xlqa
