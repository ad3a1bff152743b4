#include <gtest/gtest.h>

#include <cmath>
#include <fstream>
#include <json.hpp>
#include <set>
#include <sstream>

#include "testing.hpp"
#include "xlqa/error.hpp"
#include "xlqa/pairing.hpp"

namespace xlqa {
namespace {

using testing::lang;

TEST(Cosine, Examples) {
  const float v[] = {0.3f, -1.5f, 2.0f};
  const float neg[] = {-0.3f, 1.5f, -2.0f};
  EXPECT_NEAR(cosine_similarity(v, v), 1.0, 1e-15);
  EXPECT_NEAR(cosine_similarity(v, neg), -1.0, 1e-15);
  const float a[] = {1, 0}, b[] = {1, 1};
  EXPECT_NEAR(cosine_similarity(a, b), 0.7071067811865475, 1e-15);
}

TEST(Cosine, ZeroVectorAndDimMismatchRejected) {
  const float z[] = {0, 0}, a[] = {1, 0}, c[] = {1, 0, 0};
  EXPECT_THROW(cosine_similarity(z, a), Error);
  EXPECT_THROW(cosine_similarity(a, c), Error);
}

TEST(Cosine, SymmetricAndScaleInvariant) {
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<float> scale(0.25f, 8.0f);
  const auto m = testing::random_matrix(200, 24, rng);
  for (std::size_t i = 0; i + 1 < m.size(); i += 2) {
    const auto u = m.row(i), v = m.row(i + 1);
    EXPECT_EQ(cosine_similarity(u, v), cosine_similarity(v, u));
    // Powers of two scale exactly, other factors to within rounding.
    std::vector<float> su(u.begin(), u.end()), sv(v.begin(), v.end());
    const float a = scale(rng), b = scale(rng);
    for (auto& x : su) x *= a;
    for (auto& x : sv) x *= b;
    EXPECT_NEAR(cosine_similarity(su, sv), cosine_similarity(u, v), 1e-6);
    for (std::size_t k = 0; k < u.size(); ++k) su[k] = u[k] * 4.0f;
    EXPECT_NEAR(cosine_similarity(su, v), cosine_similarity(u, v), 1e-12);
  }
}

struct Pools {
  QuestionSet questions;
  EmbeddingMatrix embeddings{3};

  void add(const std::string& qid, const char* l, std::initializer_list<float> v) {
    questions.add(Question{qid, lang(l), qid, {}, {}});
    embeddings.add_row(qid, std::vector<float>(v));
  }
  QuestionPool pool(const QuestionSet& qs) const { return {&qs, &embeddings}; }
};

// cos(u, v) = 0.71 for u = (1, 0, 0), v = (0.71, sqrt(1 - 0.71^2), 0) up to float rounding.
TEST(MinePairs, PairAboveThresholdRecordsCosine) {
  Pools p;
  p.add("en-ww1", "en", {1, 0, 0});
  p.add("ru-stalingrad", "ru", {0.71f, std::sqrt(1.0f - 0.71f * 0.71f), 0});
  const auto en = select_language(p.questions, lang("en"));
  const auto ru = select_language(p.questions, lang("ru"));
  const auto groups = mine_pairs(p.pool(en), p.pool(ru), 0.70);
  ASSERT_EQ(groups.size(), 1u);
  const auto& g = groups[0];
  EXPECT_EQ(g.group_id, "sim:en-ww1|ru-stalingrad");
  ASSERT_EQ(g.members.size(), 2u);
  EXPECT_EQ(g.members[0].qid, "en-ww1");
  EXPECT_EQ(g.members[0].provenance, Provenance::similarity);
  ASSERT_TRUE(g.members[1].cosine.has_value());
  EXPECT_NEAR(*g.members[1].cosine, 0.71, 1e-7);
  EXPECT_EQ(g.members[0].cosine, g.members[1].cosine);
}

TEST(MinePairs, StrictThresholdBoundary) {
  // (1,0,0,0) . (7,5,5,1) = 7 and |(7,5,5,1)| = 10: cosine is exactly 0.7.
  QuestionSet qs;
  EmbeddingMatrix e(4);
  qs.add(Question{"a", lang("en"), "a", {}, {}});
  qs.add(Question{"b", lang("fi"), "b", {}, {}});
  e.add_row("a", std::vector<float>{1, 0, 0, 0});
  e.add_row("b", std::vector<float>{7, 5, 5, 1});
  EXPECT_EQ(cosine_similarity(e.row(0), e.row(1)), 0.7);
  const auto en = select_language(qs, lang("en"));
  const auto fi = select_language(qs, lang("fi"));
  EXPECT_TRUE(mine_pairs({&en, &e}, {&fi, &e}, 0.7).empty());
  EXPECT_EQ(mine_pairs({&en, &e}, {&fi, &e}, 0.7 - 1e-9).size(), 1u);
}

TEST(MinePairs, SelfPairsExcluded) {
  Pools p;
  p.add("a", "en", {1, 0, 0});
  p.add("b", "fi", {1, 0.01f, 0});
  p.add("c", "ko", {1, 0, 0.01f});
  const auto groups = mine_pairs(p.pool(p.questions), p.pool(p.questions), 0.7);
  ASSERT_EQ(groups.size(), 3u);
  std::set<std::string> ids;
  for (const auto& g : groups) {
    EXPECT_NE(g.members[0].qid, g.members[1].qid);
    ids.insert(g.group_id);
  }
  EXPECT_EQ(ids, (std::set<std::string>{"sim:a|b", "sim:a|c", "sim:b|c"}));
}

TEST(MinePairs, SwappingSidesIsSymmetric) {
  std::mt19937_64 rng(32);
  const auto base = testing::random_matrix(40, 16, rng);
  std::normal_distribution<float> noise(0.0f, 0.5f);
  QuestionSet qs;
  EmbeddingMatrix e(16);
  for (std::size_t i = 0; i < 40; ++i) {
    std::vector<float> v(base.row(i).begin(), base.row(i).end());
    qs.add(Question{"en" + std::to_string(i), lang("en"), "x", {}, {}});
    e.add_row("en" + std::to_string(i), v);
    for (auto& x : v) x += noise(rng);
    qs.add(Question{"fi" + std::to_string(i), lang("fi"), "y", {}, {}});
    e.add_row("fi" + std::to_string(i), v);
  }
  const auto en = select_language(qs, lang("en"));
  const auto fi = select_language(qs, lang("fi"));
  auto forward = mine_pairs({&en, &e}, {&fi, &e}, 0.7);
  auto backward = mine_pairs({&fi, &e}, {&en, &e}, 0.7);
  ASSERT_FALSE(forward.empty());
  ASSERT_EQ(forward.size(), backward.size());
  std::map<std::string, QuestionGroup> by_id;
  for (auto& g : forward) by_id[g.group_id] = g;
  for (auto& g : backward) {
    ASSERT_TRUE(by_id.count(g.group_id));
    auto& f = by_id[g.group_id];
    EXPECT_EQ(f.members[0], g.members[1]);
    EXPECT_EQ(f.members[1], g.members[0]);
  }
}

TEST(MinePairs, OrderedBySrcThenDst) {
  Pools p;
  p.add("b", "en", {1, 0, 0});
  p.add("a", "en", {1, 0.1f, 0});
  p.add("z", "fi", {1, 0.05f, 0});
  p.add("y", "fi", {1, 0, 0.05f});
  const auto en = select_language(p.questions, lang("en"));
  const auto fi = select_language(p.questions, lang("fi"));
  const auto groups = mine_pairs(p.pool(en), p.pool(fi), 0.7);
  std::vector<std::string> order;
  for (const auto& g : groups) order.push_back(g.members[0].qid + g.members[1].qid);
  EXPECT_EQ(order, (std::vector<std::string>{"ay", "az", "by", "bz"}));
}

TEST(MinePairs, MissingEmbeddingNamesId) {
  Pools p;
  p.add("a", "en", {1, 0, 0});
  p.questions.add(Question{"ghost", lang("fi"), "?", {}, {}});
  const auto fi = select_language(p.questions, lang("fi"));
  const auto en = select_language(p.questions, lang("en"));
  try {
    mine_pairs(p.pool(en), p.pool(fi), 0.7);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::not_found);
    EXPECT_NE(std::string(e.what()).find("ghost"), std::string::npos);
  }
}

TEST(IngestTranslationPairs, Cases) {
  std::istringstream ok(
      R"({"group_id":"g","members":[{"qid":"k","lang":"ko","provenance":"translation"},{"qid":"e","lang":"en","provenance":"translation"}]})"
      "\n");
  EXPECT_EQ(ingest_translation_pairs(ok).size(), 1u);

  std::istringstream dup(
      R"({"group_id":"twice","members":[{"qid":"a","lang":"en","provenance":"translation"},{"qid":"b","lang":"en","provenance":"translation"}]})"
      "\n");
  try {
    ingest_translation_pairs(dup);
    FAIL();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("twice"), std::string::npos) << e.what();
  }

  std::istringstream sim(
      R"({"group_id":"s","members":[{"qid":"a","lang":"en","provenance":"similarity","cosine":0.9},{"qid":"b","lang":"fi","provenance":"similarity","cosine":0.9}]})"
      "\n");
  EXPECT_THROW(ingest_translation_pairs(sim), Error);
}

TEST(SentenceBleu, Examples) {
  EXPECT_DOUBLE_EQ(sentence_bleu("the cat sat on the mat", "the cat sat on the mat", lang("en")).value,
                   1.0);
  EXPECT_LT(sentence_bleu("alpha beta gamma delta", "one two three four", lang("en")).value, 1e-3);
  EXPECT_DOUBLE_EQ(sentence_bleu("when was apple formed", "when was siri introduced by apple",
                                 lang("en"))
                       .value,
                   0.11404605374835301);
  const auto empty = sentence_bleu("", "x", lang("en"));
  EXPECT_TRUE(empty.degenerate);
  EXPECT_EQ(empty.value, 0.0);
  EXPECT_TRUE(sentence_bleu("...", "x", lang("en")).degenerate);
}

TEST(SentenceBleu, MatchesReferenceImplementation) {
  std::ifstream in(testing::fixture("pairing/bleu_cases.json"));
  for (const auto& c : nlohmann::json::parse(in)) {
    const auto cand = c["candidate"].get<std::string>();
    const auto ref = c["reference"].get<std::string>();
    EXPECT_NEAR(sentence_bleu(cand, ref, lang("en")).value, c["bleu"].get<double>(), 1e-12)
        << cand << " | " << ref;
  }
}

TEST(SentenceBleu, SelfIsOneAndRangeHolds) {
  std::mt19937_64 rng(33);
  const char* vocab[] = {"a", "b", "c", "d", "e"};
  for (int i = 0; i < 1000; ++i) {
    std::vector<std::string> x, y;
    for (std::size_t n = 1 + rng() % 7; n > 0; --n) x.push_back(vocab[rng() % 5]);
    for (std::size_t n = 1 + rng() % 7; n > 0; --n) y.push_back(vocab[rng() % 5]);
    EXPECT_NEAR(sentence_bleu_tokens(x, x).value, 1.0, 1e-15);
    const double b = sentence_bleu_tokens(x, y).value;
    EXPECT_GE(b, 0.0);
    EXPECT_LE(b, 1.0);
  }
}

TEST(Pearson, Examples) {
  const std::vector<double> xs{1, 2, 3, 4, 5.5};
  std::vector<double> lin, anti;
  for (double x : xs) {
    lin.push_back(2 * x + 1);
    anti.push_back(-x);
  }
  EXPECT_NEAR(pearson_correlation(xs, lin), 1.0, 1e-15);
  EXPECT_NEAR(pearson_correlation(xs, anti), -1.0, 1e-15);
}

TEST(Pearson, TenPointFixture) {
  std::ifstream in(testing::fixture("pairing/pearson10.json"));
  const auto j = nlohmann::json::parse(in);
  const auto xs = j["xs"].get<std::vector<double>>();
  const auto ys = j["ys"].get<std::vector<double>>();
  EXPECT_NEAR(pearson_correlation(xs, ys), j["r"].get<double>(), 1e-9);
}

TEST(Pearson, Rejections) {
  const std::vector<double> a{1, 2, 3}, c{2, 2, 2}, s{1};
  EXPECT_THROW(pearson_correlation(a, c), Error);
  EXPECT_THROW(pearson_correlation(c, a), Error);
  EXPECT_THROW(pearson_correlation(s, s), Error);
  EXPECT_THROW(pearson_correlation(a, s), Error);
}

TEST(Pearson, AffineInvariance) {
  std::mt19937_64 rng(34);
  std::normal_distribution<double> n(0, 1);
  for (int t = 0; t < 200; ++t) {
    std::vector<double> xs(12), ys(12), tx(12), ty(12);
    for (std::size_t i = 0; i < xs.size(); ++i) {
      xs[i] = n(rng);
      ys[i] = xs[i] + n(rng);
    }
    const double a = 0.5 + std::abs(n(rng)), b = n(rng), c = 0.5 + std::abs(n(rng)), d = n(rng);
    for (std::size_t i = 0; i < xs.size(); ++i) {
      tx[i] = a * xs[i] + b;
      ty[i] = c * ys[i] + d;
    }
    EXPECT_NEAR(pearson_correlation(tx, ty), pearson_correlation(xs, ys), 1e-12);
  }
}

TEST(PairMetrics, FiftyPairFixtureEndToEnd) {
  IngestOptions opts;
  const auto qs = load_questions(testing::fixture("pairing/questions.jsonl"), opts);
  const auto tr = load_questions(testing::fixture("pairing/translations.jsonl"), opts);
  const auto emb = load_embeddings(testing::fixture("pairing/embeddings.xemb"));
  std::ifstream in(testing::fixture("pairing/expected_pairs.json"));
  const auto expected = nlohmann::json::parse(in);

  const auto en = select_language(qs, lang("en"));
  const auto fi = select_language(qs, lang("fi"));
  const auto groups = mine_pairs({&en, &emb}, {&fi, &emb}, 0.7);
  ASSERT_EQ(groups.size(), 50u);
  const auto metrics = pair_metrics(groups, qs, tr);
  ASSERT_EQ(metrics.size(), 50u);
  for (std::size_t i = 0; i < 50; ++i) {
    const auto& e = expected["pairs"][i];
    EXPECT_EQ(metrics[i].src_qid, e["src_qid"].get<std::string>());
    EXPECT_EQ(metrics[i].dst_qid, e["dst_qid"].get<std::string>());
    EXPECT_EQ(metrics[i].cosine, e["cosine"].get<double>());
    EXPECT_NEAR(metrics[i].bleu, e["bleu"].get<double>(), 1e-12);
  }
  const auto r = cosine_bleu_correlation(metrics);
  ASSERT_TRUE(r.has_value());
  EXPECT_NEAR(*r, expected["pearson"].get<double>(), 1e-9);

  std::stringstream csv;
  write_pair_metrics(csv, metrics);
  EXPECT_EQ(read_pair_metrics(csv), metrics);
}

}  // namespace
}  // namespace xlqa
