#include <gtest/gtest.h>

#include "testing.hpp"
#include "xlqa/error.hpp"
#include "xlqa/types.hpp"

namespace xlqa {
namespace {

using testing::lang;

TEST(LanguageCode, AcceptsTwoAndThreeLetterLowercase) {
  EXPECT_EQ(LanguageCode::parse("en").str(), "en");
  EXPECT_EQ(LanguageCode::parse("fil").str(), "fil");
}

TEST(LanguageCode, RejectsMalformedCodes) {
  for (const char* bad : {"", "e", "EN", "engl", "e1", "é", "en "}) {
    EXPECT_THROW(LanguageCode::parse(bad), Error) << bad;
  }
}

TEST(LanguageSet, DefaultHoldsTheThirteenAnalysisLanguages) {
  const auto set = LanguageSet::analysis_default();
  EXPECT_EQ(set.codes().size(), 13u);
  for (const char* c : {"en", "ar", "fi", "ja", "ko", "ru", "bn", "te", "id", "th", "he", "sv",
                        "es"}) {
    EXPECT_TRUE(set.contains(lang(c))) << c;
  }
  EXPECT_FALSE(set.contains(lang("zh")));
  EXPECT_TRUE(LanguageSet::any().contains(lang("zh")));
}

TEST(RetrievalResult, AcceptsOrderedHits) {
  RetrievalResult r("q", {{"a", 0.9, 1}, {"b", 0.9, 2}, {"c", 0.1, 3}});
  EXPECT_EQ(r.hits().size(), 3u);
}

TEST(RetrievalResult, RejectsIncreasingScores) {
  EXPECT_THROW(RetrievalResult("q", {{"a", 0.1, 1}, {"b", 0.2, 2}}), Error);
}

TEST(RetrievalResult, RejectsBadRanks) {
  EXPECT_THROW(RetrievalResult("q", {{"a", 0.5, 2}}), Error);
  EXPECT_THROW(RetrievalResult("q", {{"a", 0.5, 1}, {"b", 0.4, 3}}), Error);
}

TEST(RetrievalResult, RejectsDuplicatePid) {
  EXPECT_THROW(RetrievalResult("q", {{"a", 0.5, 1}, {"a", 0.4, 2}}), Error);
}

QuestionGroup group_of(std::vector<GroupMember> members) {
  return QuestionGroup{"g", std::move(members)};
}

TEST(ValidateGroup, MinimalTranslationGroup) {
  EXPECT_NO_THROW(validate_group(group_of({{"q1", lang("ko"), Provenance::translation, {}},
                                           {"q2", lang("en"), Provenance::translation, {}}}),
                                 0.7));
}

TEST(ValidateGroup, RejectsSingleMember) {
  EXPECT_THROW(validate_group(group_of({{"q1", lang("ko"), Provenance::translation, {}}}), 0.7),
               Error);
}

TEST(ValidateGroup, RejectsRepeatedLanguage) {
  try {
    validate_group(group_of({{"q1", lang("en"), Provenance::translation, {}},
                             {"q2", lang("en"), Provenance::translation, {}}}),
                   0.7);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::invariant);
    EXPECT_NE(std::string(e.what()).find("'g'"), std::string::npos) << e.what();
  }
}

TEST(ValidateGroup, SimilarityMembersNeedCosineAboveThreshold) {
  EXPECT_THROW(validate_group(group_of({{"q1", lang("en"), Provenance::similarity, {}},
                                        {"q2", lang("fi"), Provenance::similarity, 0.9}}),
                              0.7),
               Error);
  EXPECT_THROW(validate_group(group_of({{"q1", lang("en"), Provenance::similarity, 0.6},
                                        {"q2", lang("fi"), Provenance::similarity, 0.6}}),
                              0.7),
               Error);
  EXPECT_NO_THROW(validate_group(group_of({{"q1", lang("en"), Provenance::similarity, 0.71},
                                           {"q2", lang("fi"), Provenance::similarity, 0.71}}),
                                 0.7));
}

TEST(ErrorType, ClosedEnumerationRoundTrips) {
  EXPECT_EQ(all_error_types().size(), kErrorTypeCount);
  for (ErrorType t : all_error_types()) EXPECT_EQ(parse_error_type(to_string(t)), t);
  EXPECT_THROW(parse_error_type("cultural_bias"), Error);
}

}  // namespace
}  // namespace xlqa
