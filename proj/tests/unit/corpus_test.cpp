#include <gtest/gtest.h>

#include <sstream>

#include "frames/corpus.hpp"
#include "support.hpp"

using namespace frames;
using frames::testing::TempDir;

TEST(WordCount, Examples) {
  EXPECT_EQ(word_count(""), 0u);
  EXPECT_EQ(word_count("  hello   world "), 2u);
  EXPECT_EQ(word_count("a\nb\tc"), 3u);
}

TEST(Ingest, SingleJsonlRow) {
  std::istringstream in(R"({"item_id":"a","program":"P","text":"one two three"})" "\n");
  const auto r = parse_corpus(in, CorpusFormat::jsonl);
  ASSERT_EQ(r.items.size(), 1u);
  EXPECT_EQ(r.items[0].word_count, 3u);
  EXPECT_EQ(r.items[0].language, "und");
  EXPECT_TRUE(r.malformed.empty());
}

TEST(Ingest, EmptyTextAccepted) {
  std::istringstream in(R"({"item_id":"a","program":"P","text":""})" "\n");
  const auto r = parse_corpus(in, CorpusFormat::jsonl);
  ASSERT_EQ(r.items.size(), 1u);
  EXPECT_EQ(r.items[0].word_count, 0u);
}

TEST(Ingest, DuplicateIdAborts) {
  std::istringstream in(R"({"item_id":"a","program":"P","text":"x"})" "\n"
                        R"({"item_id":"a","program":"P","text":"y"})" "\n");
  EXPECT_THROW(parse_corpus(in, CorpusFormat::jsonl), DuplicateId);
}

TEST(Ingest, MalformedRowsAreCollected) {
  std::istringstream in(R"({"item_id":"a","program":"P","text":"x"})" "\n"
                        "not json\n"
                        R"({"item_id":"b","text":"no program"})" "\n"
                        R"({"item_id":"c","program":"P","text":"x y","word_count":5})" "\n");
  const auto r = parse_corpus(in, CorpusFormat::jsonl);
  EXPECT_EQ(r.items.size(), 1u);
  ASSERT_EQ(r.malformed.size(), 3u);
  EXPECT_EQ(r.malformed[0].line, 2u);
  EXPECT_EQ(r.malformed[1].line, 3u);
  EXPECT_EQ(r.malformed[2].line, 4u);
}

TEST(Ingest, NoValidRowsIsEmptyCorpus) {
  std::istringstream in("garbage\n");
  EXPECT_THROW(parse_corpus(in, CorpusFormat::jsonl), EmptyCorpus);
  std::istringstream empty("");
  EXPECT_THROW(parse_corpus(empty, CorpusFormat::jsonl), EmptyCorpus);
}

TEST(Ingest, CsvWithQuotedFieldsAndDate) {
  std::istringstream in(
      "item_id,program,air_date,language,text\n"
      "n1,Nieuwsuur,2016-03-01,nl,\"een, twee\ndrie\"\n"
      "n2,Nieuwsuur,,nl,\"zei \"\"hij\"\"\"\n");
  const auto r = parse_corpus(in, CorpusFormat::csv);
  ASSERT_EQ(r.items.size(), 2u);
  EXPECT_EQ(r.items[0].text, "een, twee\ndrie");
  EXPECT_EQ(r.items[0].word_count, 3u);
  ASSERT_TRUE(r.items[0].air_date.has_value());
  EXPECT_EQ(static_cast<int>(r.items[0].air_date->year()), 2016);
  EXPECT_FALSE(r.items[1].air_date.has_value());
  EXPECT_EQ(r.items[1].text, "zei \"hij\"");
}

TEST(Ingest, BadDateIsMalformed) {
  std::istringstream in(R"({"item_id":"a","program":"P","text":"x","air_date":"2016-02-30"})" "\n"
                        R"({"item_id":"b","program":"P","text":"x"})" "\n");
  const auto r = parse_corpus(in, CorpusFormat::jsonl);
  EXPECT_EQ(r.items.size(), 1u);
  EXPECT_EQ(r.malformed.size(), 1u);
}

TEST(Corpus, SaveLoadRoundTrip) {
  TempDir dir;
  std::istringstream in(R"({"item_id":"a","program":"P","text":"één twee","language":"nl","air_date":"2015-01-02"})" "\n"
                        R"({"item_id":"b","program":"Q","text":""})" "\n");
  const auto items = parse_corpus(in, CorpusFormat::jsonl).items;
  save_corpus(dir / "corpus.jsonl", items);
  EXPECT_EQ(load_corpus(dir / "corpus.jsonl"), items);
}

TEST(CorpusStats, Examples) {
  EXPECT_TRUE(corpus_stats({}).empty());

  std::vector<TranscriptItem> items = {
      {"1", "P", std::nullopt, "en", "a b c d", 4},
      {"2", "P", std::nullopt, "en", "a b c d e f", 6},
      {"3", "B", std::nullopt, "en", "x", 1},
  };
  const auto stats = corpus_stats(items);
  ASSERT_EQ(stats.size(), 2u);
  EXPECT_EQ(stats[0].program, "B");
  EXPECT_EQ(stats[1].program, "P");
  EXPECT_EQ(stats[1].count, 2u);
  EXPECT_DOUBLE_EQ(stats[1].mean_words, 5.0);
  EXPECT_EQ(stats[1].min_words, 4u);
  EXPECT_EQ(stats[1].max_words, 6u);
}
