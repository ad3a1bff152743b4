#include <gtest/gtest.h>

#include <fstream>
#include <json.hpp>
#include <sstream>

#include "testing.hpp"
#include "xlqa/embeddings.hpp"
#include "xlqa/error.hpp"
#include "xlqa/report.hpp"

namespace xlqa {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;
using testing::fixture;
using testing::lang;
using testing::read_file;
using testing::TempDir;

json load_json(const fs::path& p) {
  std::ifstream in(p);
  return json::parse(in);
}

AnalysisConfig consistency_config(SelectionMode mode, const fs::path& out) {
  AnalysisConfig c;
  c.passages = fixture("consistency/passages.jsonl");
  c.golds = fixture("consistency/questions.jsonl");
  c.groups = fixture("consistency/groups.jsonl");
  c.retrievals = fixture("consistency/retrievals.jsonl");
  c.answers = fixture("consistency/answers.jsonl");
  c.labels = fixture("consistency/labels.jsonl");
  c.out_dir = out;
  c.mode = mode;
  return c;
}

void check_against_expected(const fs::path& out, const json& expected) {
  std::ifstream sg(out / artifact::kSelectedGroups);
  const auto selected = read_groups(sg, {LanguageSet::any(), 0.7});
  ASSERT_EQ(selected.size(), expected["selected"].size());
  for (std::size_t i = 0; i < selected.size(); ++i) {
    EXPECT_EQ(selected[i].group_id, expected["selected"][i]["group_id"]);
    std::vector<std::string> langs;
    for (const auto& m : selected[i].members) langs.push_back(m.lang.str());
    std::sort(langs.begin(), langs.end());
    EXPECT_EQ(langs, expected["selected"][i]["languages"].get<std::vector<std::string>>());
  }

  std::ifstream cin(out / artifact::kContexts);
  const auto contexts = read_contexts(cin);
  ASSERT_EQ(contexts.size(), expected["contexts"].size());
  for (std::size_t i = 0; i < contexts.size(); ++i) {
    const auto& e = expected["contexts"][i];
    EXPECT_EQ(contexts[i].group_id, e["group_id"]);
    EXPECT_EQ(contexts[i].qid, e["qid"]);
    EXPECT_EQ(contexts[i].lang.str(), e["lang"]);
    EXPECT_EQ(contexts[i].pid, e["pid"]);
    EXPECT_EQ(contexts[i].rank, e["rank"].get<std::size_t>());
    EXPECT_EQ(contexts[i].score, e["score"].get<double>());
  }

  std::ifstream min(out / artifact::kMatrix);
  const auto matrix = read_matrix(min);
  ASSERT_EQ(matrix.rows().size(), expected["matrix"].size());
  for (std::size_t i = 0; i < matrix.rows().size(); ++i) {
    const auto& row = matrix.rows()[i];
    const auto& e = expected["matrix"][i];
    EXPECT_EQ(row.group_id, e["group_id"]);
    ASSERT_EQ(row.cells.size(), e["cells"].size()) << row.group_id;
    for (const auto& [code, cell] : e["cells"].items()) {
      const auto& got = row.cells.at(lang(code.c_str()));
      EXPECT_EQ(got.answer, cell["answer"]);
      EXPECT_NEAR(got.f1, cell["f1"].get<double>(), 1e-12) << row.group_id << " " << code;
      EXPECT_EQ(got.em, cell["em"].get<int>());
      EXPECT_EQ(got.context_pid, cell["context_pid"]);
      EXPECT_EQ(got.no_gold, cell["no_gold"].get<bool>());
    }
  }

  std::ifstream rin(out / artifact::kRates);
  const auto rates = read_rates(rin);
  ASSERT_EQ(rates.size(), 2u);
  EXPECT_EQ(rates[0].mode, DivergenceMode::score);
  EXPECT_EQ(rates[1].mode, DivergenceMode::string);
  for (const auto& r : rates) {
    const auto& e = expected["rates"][std::string(to_string(r.mode))];
    EXPECT_EQ(r.count_inconsistent, e["count_inconsistent"].get<std::size_t>());
    EXPECT_EQ(r.total, e["total"].get<std::size_t>());
    EXPECT_NEAR(r.rate, e["rate"].get<double>(), 1e-12);
  }
}

TEST(Analysis, OracleFixture) {
  TempDir tmp;
  const auto report = run_analysis(consistency_config(SelectionMode::oracle, tmp.path()));
  const auto expected = load_json(fixture("consistency/expected_oracle.json"));
  EXPECT_EQ(report.groups, 10u);
  EXPECT_EQ(report.selected_groups, 7u);
  check_against_expected(tmp.path(), expected);
  EXPECT_EQ(read_file(tmp / artifact::kHeatmap), read_file(fixture("consistency/heatmap_oracle.csv")));
  ASSERT_TRUE(report.score_rate && report.string_rate && report.histogram);
  EXPECT_EQ(report.score_rate->count_inconsistent, 3u);
  EXPECT_EQ(report.histogram->total(), 4u);
  EXPECT_NE(report.summary.find("oracle"), std::string::npos);
  EXPECT_EQ(read_file(tmp / artifact::kSummary), report.summary);
}

TEST(Analysis, NonOracleFixture) {
  TempDir tmp;
  const auto report = run_analysis(consistency_config(SelectionMode::non_oracle, tmp.path()));
  const auto expected = load_json(fixture("consistency/expected_non_oracle.json"));
  EXPECT_EQ(report.selected_groups, 10u);
  check_against_expected(tmp.path(), expected);
  EXPECT_EQ(read_file(tmp / artifact::kHeatmap),
            read_file(fixture("consistency/heatmap_non_oracle.csv")));
}

TEST(Analysis, WithoutAnswersWritesSelectionOnly) {
  TempDir tmp;
  auto c = consistency_config(SelectionMode::oracle, tmp.path());
  c.answers.reset();
  c.labels.reset();
  const auto report = run_analysis(c);
  EXPECT_FALSE(report.score_rate.has_value());
  EXPECT_TRUE(fs::exists(tmp / artifact::kContexts));
  EXPECT_FALSE(fs::exists(tmp / artifact::kMatrix));
}

TEST(Analysis, MissingInputNamesPath) {
  TempDir tmp;
  auto c = consistency_config(SelectionMode::oracle, tmp.path());
  c.retrievals = tmp / "nope.jsonl";
  try {
    run_analysis(c);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::not_found);
    EXPECT_NE(std::string(e.what()).find("nope.jsonl"), std::string::npos);
  }
}

PipelineConfig pipeline_config(const fs::path& out) {
  auto c = load_pipeline_config(fixture("pipeline/config.json"));
  c.out_dir = out;
  return c;
}

TEST(Pipeline, ConfigResolvesRelativePaths) {
  const auto c = load_pipeline_config(fixture("pipeline/config.json"));
  EXPECT_EQ(c.passages, fs::path(fixture("pipeline/passages.jsonl")));
  EXPECT_EQ(c.out_dir, fs::path(fixture("pipeline/out")));
  EXPECT_EQ(c.workers, 2u);
  EXPECT_EQ(c.mode, SelectionMode::oracle);
  EXPECT_EQ(c.retrieval_depth(), kOracleTopK);
}

TEST(Pipeline, EndToEnd) {
  TempDir tmp;
  std::vector<std::string> warnings;
  const auto report = run_pipeline(pipeline_config(tmp.path()),
                                   [&](const std::string& w) { warnings.push_back(w); });
  const auto expected = load_json(fixture("pipeline/expected.json"));

  std::ifstream rin(tmp / artifact::kRetrievals);
  const auto retrievals = read_retrievals(rin);
  ASSERT_EQ(retrievals.size(), expected["retrieval_top"].size());
  for (const auto& r : retrievals) {
    const auto top = expected["retrieval_top"][r.qid()].get<std::vector<std::string>>();
    ASSERT_GE(r.hits().size(), top.size());
    for (std::size_t i = 0; i < top.size(); ++i) EXPECT_EQ(r.hits()[i].pid, top[i]) << r.qid();
  }

  std::ifstream sg(tmp / artifact::kSelectedGroups);
  const auto selected = read_groups(sg, {LanguageSet::any(), 0.7});
  ASSERT_EQ(selected.size(), expected["selected"].size());
  for (std::size_t i = 0; i < selected.size(); ++i) {
    EXPECT_EQ(selected[i].group_id, expected["selected"][i]["group_id"]);
    EXPECT_EQ(selected[i].members.size(), expected["selected"][i]["languages"].size());
  }

  std::ifstream cin(tmp / artifact::kContexts);
  const auto contexts = read_contexts(cin);
  ASSERT_EQ(contexts.size(), expected["contexts"].size());
  for (std::size_t i = 0; i < contexts.size(); ++i) {
    EXPECT_EQ(contexts[i].qid, expected["contexts"][i]["qid"]);
    EXPECT_EQ(contexts[i].pid, expected["contexts"][i]["pid"]);
  }

  ASSERT_TRUE(report.score_rate && report.string_rate);
  EXPECT_EQ(report.score_rate->count_inconsistent, expected["rates"]["score"][0].get<std::size_t>());
  EXPECT_EQ(report.score_rate->total, expected["rates"]["score"][1].get<std::size_t>());
  EXPECT_EQ(report.string_rate->count_inconsistent,
            expected["rates"]["string"][0].get<std::size_t>());

  // Answers of members the oracle filter dropped are reported and skipped.
  ASSERT_EQ(warnings.size(), 2u);
  EXPECT_NE(warnings[0].find("'q2-fi'"), std::string::npos);
  EXPECT_NE(warnings[1].find("'q3-ko'"), std::string::npos);
  EXPECT_EQ(report.outputs.front().filename(), artifact::kRetrievals);
}

TEST(Pipeline, PassageWithoutEmbeddingWarns) {
  TempDir tmp;
  auto c = pipeline_config(tmp / "out");
  testing::write_file(tmp / "passages.jsonl",
                      read_file(c.passages) +
                          R"({"pid":"p9-en","lang":"en","title":"t","text":"unembedded"})" "\n");
  c.passages = tmp / "passages.jsonl";
  std::vector<std::string> warnings;
  run_pipeline(c, [&](const std::string& w) { warnings.push_back(w); });
  bool saw = false;
  for (const auto& w : warnings) saw |= w.find("1 passages have no embedding") != std::string::npos;
  EXPECT_TRUE(saw);
}

TEST(Pipeline, RerunIsByteIdentical) {
  TempDir a, b;
  auto ca = pipeline_config(a.path());
  auto cb = pipeline_config(b.path());
  cb.workers = 5;
  const auto ra = run_pipeline(ca);
  run_pipeline(cb);
  ASSERT_FALSE(ra.outputs.empty());
  for (const auto& p : ra.outputs) {
    EXPECT_EQ(read_file(p), read_file(b / p.filename())) << p.filename();
  }
}

TEST(Pipeline, ShallowRetrievalWarns) {
  TempDir tmp;
  auto c = pipeline_config(tmp.path());
  c.k = 5;
  std::vector<std::string> warnings;
  run_pipeline(c, [&](const std::string& w) { warnings.push_back(w); });
  bool saw = false;
  for (const auto& w : warnings) saw |= w.find("k = 5") != std::string::npos;
  EXPECT_TRUE(saw);
}

TEST(Pipeline, MissingInputNamesRoleAndPath) {
  TempDir tmp;
  auto c = pipeline_config(tmp.path());
  c.question_embeddings = tmp / "absent.xemb";
  try {
    run_pipeline(c);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::not_found);
    const std::string msg = e.what();
    EXPECT_NE(msg.find("question_embeddings"), std::string::npos);
    EXPECT_NE(msg.find("absent.xemb"), std::string::npos);
  }
}

TEST(Pipeline, DimensionMismatchRejected) {
  TempDir tmp;
  auto c = pipeline_config(tmp / "out");
  EmbeddingMatrix q(4);
  const std::vector<float> v{1, 0, 0, 0};
  q.add_row("q0-en", v);
  write_embeddings(tmp / "q.xemb", q);
  c.question_embeddings = tmp / "q.xemb";
  try {
    run_pipeline(c);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::dimension_mismatch);
  }
}

TEST(Heatmap, TwoByTwo) {
  MatrixRow a{"ga", {lang("en"), lang("fi")}, {}};
  a.cells[lang("en")] = MatrixCell{"x", 1.0, 1, "p", false};
  a.cells[lang("fi")] = MatrixCell{"y", 0.5, 0, "p", false};
  MatrixRow b{"gb", {lang("en"), lang("fi")}, {}};
  b.cells[lang("en")] = MatrixCell{"x", 0.25, 0, "p", false};
  const ConsistencyMatrix m({a, b});
  std::stringstream s;
  emit_heatmap_data(s, m);
  EXPECT_EQ(s.str(), "group_id,en,fi\r\nga,1,0.5\r\ngb,0.25,\r\n");
  s.seekg(0);
  const auto h = read_heatmap(s);
  EXPECT_EQ(h, heatmap_of(m));
  EXPECT_FALSE(h.values[1][1].has_value());
}

TEST(Heatmap, QuotesAwkwardGroupIds) {
  MatrixRow a{"sim:a,\"b\"", {lang("en"), lang("fi")}, {}};
  a.cells[lang("en")] = MatrixCell{"x", 1.0, 1, "p", false};
  const ConsistencyMatrix m({a});
  std::stringstream s;
  emit_heatmap_data(s, m);
  EXPECT_EQ(s.str(), "group_id,en,fi\r\n\"sim:a,\"\"b\"\"\",1,\r\n");
  s.seekg(0);
  EXPECT_EQ(read_heatmap(s), heatmap_of(m));
}

}  // namespace
}  // namespace xlqa
