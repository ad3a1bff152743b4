#include <gtest/gtest.h>

#include <sstream>

#include "testing.hpp"
#include "xlqa/error.hpp"
#include "xlqa/records.hpp"

namespace xlqa {
namespace {

using testing::lang;

std::string message_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.what();
  }
  return {};
}

TEST(LoadPassages, ThreeValidLines) {
  std::istringstream in(
      R"({"pid":"p1","lang":"en","title":"A","text":"alpha"})"
      "\n"
      R"({"pid":"p2","lang":"fi","title":"B","text":"beeta"})"
      "\n\n"
      R"({"pid":"p3","lang":"ko","title":"C","text":"감마"})"
      "\n");
  const auto corpus = read_passages(in);
  EXPECT_EQ(corpus.size(), 3u);
  ASSERT_NE(corpus.find("p3"), nullptr);
  EXPECT_EQ(corpus.find("p3")->text, "감마");
}

TEST(LoadPassages, DuplicatePidNamesLineTwo) {
  std::istringstream in(
      R"({"pid":"p1","lang":"en","title":"A","text":"alpha"})"
      "\n"
      R"({"pid":"p1","lang":"en","title":"B","text":"beta"})"
      "\n");
  const std::string msg = message_of([&] { read_passages(in, {}, "passages.jsonl"); });
  EXPECT_NE(msg.find("passages.jsonl line 2"), std::string::npos) << msg;
  EXPECT_NE(msg.find("p1"), std::string::npos) << msg;
}

TEST(LoadPassages, EmptyFileIsEmptyCorpus) {
  std::istringstream in("");
  EXPECT_EQ(read_passages(in).size(), 0u);
}

TEST(LoadPassages, MalformedRecordsArePositioned) {
  const char* bad[] = {
      "not json",
      R"(["array"])",
      R"({"pid":"p","lang":"en","title":"t"})",
      R"({"pid":"p","lang":"xx","title":"t","text":"x"})",
      R"({"pid":"p","lang":"en","title":"t","text":""})",
      R"({"pid":7,"lang":"en","title":"t","text":"x"})",
  };
  for (const char* line : bad) {
    std::istringstream in(std::string(R"({"pid":"ok","lang":"en","title":"","text":"fine"})") +
                          "\n" + line + "\n");
    const std::string msg = message_of([&] { read_passages(in, {}, "f"); });
    EXPECT_NE(msg.find("f line 2"), std::string::npos) << line << " -> " << msg;
  }
}

TEST(LoadPassages, MissingFileNamesPath) {
  const std::string msg = message_of([] { load_passages("/nonexistent/passages.jsonl"); });
  EXPECT_NE(msg.find("/nonexistent/passages.jsonl"), std::string::npos) << msg;
}

TEST(Questions, GoldsMayBeEmptyAndGroupOptional) {
  std::istringstream in(R"({"qid":"q1","lang":"en","text":"why?","gold_answers":[]})"
                        "\n"
                        R"({"qid":"q2","lang":"fi","text":"miksi?","gold_answers":["a","b"],"group_id":"g"})"
                        "\n");
  const auto qs = read_questions(in);
  ASSERT_EQ(qs.size(), 2u);
  EXPECT_TRUE(qs.find("q1")->gold_answers.empty());
  EXPECT_FALSE(qs.find("q1")->group_id.has_value());
  EXPECT_EQ(qs.find("q2")->group_id, "g");
}

TEST(Questions, DuplicateQidRejected) {
  std::istringstream in(R"({"qid":"q1","lang":"en","text":"a"})"
                        "\n"
                        R"({"qid":"q1","lang":"en","text":"b"})"
                        "\n");
  EXPECT_THROW(read_questions(in), Error);
}

TEST(Groups, SevenLanguageGroupAccepted) {
  std::string line = R"({"group_id":"g7","members":[)";
  const char* langs[] = {"ar", "bn", "fi", "ja", "ko", "ru", "te"};
  for (int i = 0; i < 7; ++i) {
    if (i) line += ",";
    line += R"({"qid":"q)" + std::to_string(i) + R"(","lang":")" + langs[i] +
            R"(","provenance":"translation"})";
  }
  line += "]}\n";
  std::istringstream in(line);
  const auto groups = read_groups(in);
  ASSERT_EQ(groups.size(), 1u);
  EXPECT_EQ(groups[0].members.size(), 7u);
}

TEST(Groups, DuplicateGroupIdRejected) {
  const std::string g =
      R"({"group_id":"g","members":[{"qid":"a","lang":"en","provenance":"translation"},{"qid":"b","lang":"fi","provenance":"translation"}]})";
  std::istringstream in(g + "\n" + g + "\n");
  const std::string msg = message_of([&] { read_groups(in, {}, "groups"); });
  EXPECT_NE(msg.find("groups line 2"), std::string::npos) << msg;
}

TEST(Groups, ReferencesValidated) {
  QuestionSet qs;
  qs.add(Question{"a", lang("en"), "x", {}, "g"});
  qs.add(Question{"b", lang("fi"), "y", {}, "g"});
  std::vector<QuestionGroup> groups{
      {"g", {{"a", lang("en"), Provenance::translation, {}},
             {"b", lang("fi"), Provenance::translation, {}}}}};
  EXPECT_NO_THROW(validate_group_references(qs, groups));

  groups[0].members[1].lang = lang("ko");
  EXPECT_THROW(validate_group_references(qs, groups), Error);

  groups[0].members[1] = {"missing", lang("fi"), Provenance::translation, {}};
  EXPECT_THROW(validate_group_references(qs, groups), Error);

  QuestionSet dangling;
  dangling.add(Question{"c", lang("en"), "z", {}, "nowhere"});
  EXPECT_THROW(validate_group_references(dangling, {}), Error);
}

TEST(Answers, OnePerQid) {
  std::istringstream in(R"({"qid":"q","lang":"en","context_pid":"p","answer":"a"})"
                        "\n"
                        R"({"qid":"q","lang":"en","context_pid":"p","answer":"b"})"
                        "\n");
  EXPECT_THROW(read_answers(in), Error);
}

TEST(Labels, UnknownErrorTypeRejectedAtIngestion) {
  std::istringstream in(R"({"group_id":"g","error_type":"retriever_issue","note":"n"})"
                        "\n"
                        R"({"group_id":"g","error_type":"bias","note":"n"})"
                        "\n");
  const std::string msg = message_of([&] { read_labels(in, {}, "labels"); });
  EXPECT_NE(msg.find("labels line 2"), std::string::npos) << msg;
}

TEST(Retrievals, OrderingCheckedOnRead) {
  std::istringstream in(
      R"({"qid":"q","hits":[{"pid":"a","score":0.1,"rank":1},{"pid":"b","score":0.2,"rank":2}]})"
      "\n");
  EXPECT_THROW(read_retrievals(in), Error);
}

TEST(Retrievals, RoundTrip) {
  std::vector<RetrievalResult> rs{RetrievalResult("q1", {{"a", 0.5, 1}, {"b", -0.25, 2}}),
                                  RetrievalResult("q2", {})};
  std::stringstream s;
  write_retrievals(s, rs);
  EXPECT_EQ(read_retrievals(s), rs);
}

}  // namespace
}  // namespace xlqa
