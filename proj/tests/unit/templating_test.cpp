#include <gtest/gtest.h>

#include "support/fixtures.hpp"
#include "zsc/errors.hpp"
#include "zsc/templating.hpp"

namespace zsc {
namespace {

using testing::sentiment_template;

TEST(Placeholders, ScansNamesInOrder) {
  EXPECT_EQ(placeholders("This [DOMAIN] leans [POLARITY]: "),
            (std::vector<std::string>{"DOMAIN", "POLARITY"}));
  EXPECT_EQ(placeholders("Is this [DOMAIN] [LIST OF LABEL NAMES]?"),
            (std::vector<std::string>{"DOMAIN", "LIST OF LABEL NAMES"}));
  EXPECT_TRUE(placeholders("no [lowercase] here [ ]").empty());
}

TEST(ExpandTemplate, SentimentTemplate) {
  Label positive{0, "positive"};
  EXPECT_EQ(expand_template(sentiment_template(0), positive,
                            ContextAssignment({{"domain", "movie review"}})),
            "This movie review leans positive: ");
}

TEST(ExpandTemplate, EmpowermentTemplate) {
  DescriptionTemplate t;
  t.text =
      "This Reddit comment written by a [AUTHOR] empowers and uplifts the "
      "addressed [ADDRESSEE]: ";
  t.bindings["AUTHOR"] = PlaceholderBinding::context("author");
  t.bindings["ADDRESSEE"] = PlaceholderBinding::context("addressee");
  EXPECT_EQ(expand_template(t, Label{0, "empowering"},
                            ContextAssignment({{"author", "woman"},
                                               {"addressee", "man"}})),
            "This Reddit comment written by a woman empowers and uplifts the "
            "addressed man: ");
}

TEST(ExpandTemplate, LabelMapBinding) {
  DescriptionTemplate t;
  t.text = "This text leans [POLARITY]: ";
  t.bindings["POLARITY"] = PlaceholderBinding::label_map(
      {{"pos", "positive"}, {"neg", "negative"}});
  EXPECT_EQ(expand_template(t, Label{1, "neg"}, {}), "This text leans negative: ");
  EXPECT_THROW(expand_template(t, Label{2, "neutral"}, {}), TemplateError);
}

TEST(ExpandTemplate, UnresolvedPlaceholderIsNamed) {
  DescriptionTemplate t;
  t.text = "This [DOMAIN] contains hate-speech about [SUBJECT]: ";
  t.bindings["DOMAIN"] = PlaceholderBinding::fixed("text");
  t.bindings["SUBJECT"] = PlaceholderBinding::context("subject");
  try {
    expand_template(t, Label{0, "hate"}, ContextAssignment({{"domain", "x"}}));
    FAIL();
  } catch (const TemplateError& e) {
    EXPECT_NE(std::string(e.what()).find("[SUBJECT]"), std::string::npos);
  }
  t.bindings.erase("SUBJECT");
  EXPECT_THROW(expand_template(t, Label{0, "hate"}, {}), TemplateError);
}

TEST(ExpandTemplate, EmptyExpansionIsAnError) {
  DescriptionTemplate t;
  t.text = "[X]";
  t.bindings["X"] = PlaceholderBinding::fixed("");
  EXPECT_THROW(expand_template(t, Label{0, "a"}, {}), TemplateError);
}

TEST(StripContext, ReplacesContextPlaceholdersWithNeutralValues) {
  DescriptionTemplate stripped = strip_context(sentiment_template(0));
  EXPECT_EQ(stripped.text, "This text leans [POLARITY]: ");
  EXPECT_EQ(expand_template(stripped, Label{0, "positive"}, {}),
            "This text leans positive: ");
}

TEST(StripContext, EthosSubjectBecomesSomething) {
  DescriptionTemplate t;
  t.text = "This [DOMAIN] contains hate-speech about [SUBJECT]: ";
  t.bindings["DOMAIN"] = PlaceholderBinding::context("domain");
  t.bindings["SUBJECT"] = PlaceholderBinding::context("subject");
  t.neutral_values = {{"DOMAIN", "text"}, {"SUBJECT", "something"}};
  EXPECT_EQ(strip_context(t).text,
            "This text contains hate-speech about something: ");
}

TEST(StripContext, NoContextPlaceholdersIsIdentity) {
  DescriptionTemplate t;
  t.text = "This text leans [POLARITY]: ";
  t.bindings["POLARITY"] = PlaceholderBinding::label_name();
  EXPECT_EQ(strip_context(t), t);
}

TEST(StripContext, MissingNeutralValueIsAnError) {
  DescriptionTemplate t = sentiment_template(0);
  t.neutral_values.clear();
  EXPECT_THROW(strip_context(t), TemplateError);
}

TEST(StripContext, StrippedExpansionNeverReadsContext) {
  const DescriptionTemplate stripped = strip_context(sentiment_template(1));
  const Label label{1, "negative"};
  EXPECT_EQ(expand_template(stripped, label,
                            ContextAssignment({{"domain", "movie review"}})),
            expand_template(stripped, label,
                            ContextAssignment({{"domain", "tweet"}})));
}

TEST(TemplatePack, ParsesAllBindingForms) {
  LabelSet labels({"positive", "negative"});
  auto pack = parse_template_pack(nlohmann::json::parse(R"([
    {"label": "positive", "template": "This [DOMAIN] leans [POLARITY]: ",
     "bindings": {"DOMAIN": {"context": "domain"}, "POLARITY": {"label": "name"}},
     "neutral_values": {"DOMAIN": "text"}},
    {"label": "negative", "template": "This [DOMAIN] leans [POLARITY] [X]: ",
     "bindings": {"DOMAIN": {"context": "domain"},
                  "POLARITY": {"label": {"negative": "very negative"}},
                  "X": {"value": "indeed"}},
     "neutral_values": {"DOMAIN": "text"}}])"),
                                  labels);
  ASSERT_EQ(pack.size(), 2u);
  EXPECT_EQ(expand_template(pack[1], labels.at(1),
                            ContextAssignment({{"domain", "tweet"}})),
            "This tweet leans very negative indeed: ");
  EXPECT_THROW(parse_template_pack(nlohmann::json::parse(
                                       R"([{"label": "positive", "template": "[A]"}])"),
                                   labels),
               DataError);
  EXPECT_THROW(parse_template_pack(nlohmann::json::parse(
                                       R"([{"label": "mixed", "template": "a"}])"),
                                   labels),
               DataError);
}

class BuildPoolTest : public ::testing::Test {
 protected:
  LabelSet labels_{{"positive", "negative"}};
  ContextAssignment movie_{{{"domain", "movie review"}}};
  std::vector<DescriptionTemplate> templates_{sentiment_template(0),
                                              sentiment_template(1)};

  ParaphraseFile paraphrases(std::size_t count) const {
    ParaphraseFile file;
    for (const auto& label : labels_) {
      auto& list = file.entries[{label.id, movie_.fingerprint()}];
      for (std::size_t i = 0; i < count; ++i)
        list.push_back("A " + label.name + " movie review, variant " +
                       std::to_string(i) + ": ");
    }
    return file;
  }
};

TEST_F(BuildPoolTest, TemplateFirstThenParaphrases) {
  ParaphraseFile file = paraphrases(20);
  auto pool = build_pool(templates_, &file, labels_, std::span(&movie_, 1));
  const auto& entry = pool.at(0, movie_);
  EXPECT_EQ(entry.descriptions.size(), 21u);
  EXPECT_EQ(entry.descriptions[0], "This movie review leans positive: ");
  EXPECT_EQ(entry.descriptions[1], "A positive movie review, variant 0: ");
}

TEST_F(BuildPoolTest, DuplicateParaphraseDropped) {
  ParaphraseFile file = paraphrases(20);
  file.entries[{0, movie_.fingerprint()}][5] = "This movie review leans positive: ";
  auto pool = build_pool(templates_, &file, labels_, std::span(&movie_, 1));
  EXPECT_EQ(pool.at(0, movie_).descriptions.size(), 20u);
  EXPECT_EQ(pool.at(1, movie_).descriptions.size(), 21u);
}

TEST_F(BuildPoolTest, ExcludeTemplateFlag) {
  ParaphraseFile file = paraphrases(3);
  auto pool = build_pool(templates_, &file, labels_, std::span(&movie_, 1),
                         PoolOptions{.use_context = true, .include_template = false});
  EXPECT_EQ(pool.at(0, movie_).descriptions.front(),
            "A positive movie review, variant 0: ");
}

TEST_F(BuildPoolTest, UncoveredContextNamesLabelAndContext) {
  ParaphraseFile file = paraphrases(3);
  ContextAssignment tweet({{"domain", "tweet"}});
  std::vector<ContextAssignment> ctxs{movie_, tweet};
  try {
    build_pool({}, &file, labels_, ctxs);
    FAIL();
  } catch (const DataError& e) {
    const std::string what = e.what();
    EXPECT_NE(what.find("positive"), std::string::npos) << what;
    EXPECT_NE(what.find("tweet"), std::string::npos) << what;
  }
}

TEST_F(BuildPoolTest, ContextOffUsesStrippedTemplatesUnderEmptyContext) {
  ContextAssignment tweet({{"domain", "tweet"}});
  std::vector<ContextAssignment> ctxs{movie_, tweet};
  auto pool = build_pool(templates_, nullptr, labels_, ctxs,
                         PoolOptions{.use_context = false});
  EXPECT_EQ(pool.entries().size(), 2u);
  EXPECT_EQ(pool.at(1, ContextAssignment{}).descriptions,
            std::vector<std::string>{"This text leans negative: "});
}

TEST_F(BuildPoolTest, NoResidualPlaceholders) {
  ParaphraseFile file = paraphrases(4);
  auto pool = build_pool(templates_, &file, labels_, std::span(&movie_, 1));
  for (const auto& [key, entry] : pool.entries())
    for (const auto& d : entry.descriptions) EXPECT_TRUE(placeholders(d).empty());

  file.entries[{0, movie_.fingerprint()}].push_back("Leans [POLARITY]: ");
  EXPECT_THROW(build_pool(templates_, &file, labels_, std::span(&movie_, 1)),
               DataError);
}

TEST(RequiredContexts, FirstOccurrenceOrderAndContextOff) {
  std::vector<Example> data(3);
  data[0].contexts = {ContextAssignment({{"domain", "tweet"}})};
  data[1].contexts = {ContextAssignment({{"domain", "movie review"}})};
  data[2].contexts = {ContextAssignment({{"domain", "tweet"}})};
  auto ctxs = required_contexts(data, true);
  ASSERT_EQ(ctxs.size(), 2u);
  EXPECT_EQ(ctxs[0].get("domain"), "tweet");
  EXPECT_EQ(required_contexts(data, false).size(), 1u);
  EXPECT_TRUE(required_contexts(data, false)[0].empty());
}

}  // namespace
}  // namespace zsc
