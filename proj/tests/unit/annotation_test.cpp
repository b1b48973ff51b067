#include <gtest/gtest.h>

#include <set>

#include "frames/annotation.hpp"
#include "frames/translation.hpp"
#include "support.hpp"

using namespace frames;
using frames::testing::TempDir;

namespace {

std::vector<TranscriptItem> items_for(const std::string& program, std::size_t n) {
  std::vector<TranscriptItem> items;
  for (std::size_t i = 0; i < n; ++i) {
    items.push_back({program + std::to_string(i), program, std::nullopt, "en", "w", 1});
  }
  return items;
}

const std::string kText =
    "The minister resigned on Monday. Families in the north are still waiting for help.\n"
    "Opposition parties  blamed the cabinet.";

Annotation draft(Frame main, std::optional<Frame> alt, std::vector<std::string> evidence) {
  Annotation a;
  a.item_id = "x";
  a.annotator_id = "ann1";
  a.main_frame = main;
  a.alternative_frame = alt;
  a.evidence_sentences = std::move(evidence);
  return a;
}

}  // namespace

TEST(Batches, ThousandItemsTwentyByFifty) {
  const auto items = items_for("P", 1000);
  const auto batches = generate_batches(items, {}, Timestamp{});
  ASSERT_EQ(batches.size(), 20u);
  std::set<std::string> seen;
  for (const auto& b : batches) {
    EXPECT_EQ(b.item_ids.size(), 50u);
    seen.insert(b.item_ids.begin(), b.item_ids.end());
  }
  EXPECT_EQ(seen.size(), 1000u);
  EXPECT_EQ(batches.front().batch_id, "P-01");
  EXPECT_EQ(batches.back().batch_id, "P-20");
}

TEST(Batches, DeterministicForFixedSeed) {
  const auto items = items_for("P", 10);
  const BatchOptions opts{5, 2, 7};
  const auto a = generate_batches(items, opts, Timestamp{});
  const auto b = generate_batches(items, opts, Timestamp{});
  EXPECT_EQ(a, b);
  const auto c = generate_batches(items, {5, 2, 8}, Timestamp{});
  EXPECT_NE(a[0].item_ids, c[0].item_ids);
}

TEST(Batches, InsufficientItems) {
  const auto items = items_for("P", 10);
  try {
    generate_batches(items, {6, 2, 7}, Timestamp{});
    FAIL();
  } catch (const InsufficientItems& e) {
    EXPECT_EQ(e.needed(), 12u);
    EXPECT_EQ(e.available(), 10u);
  }
}

TEST(Batches, PerProgramAndLeftoversUnbatched) {
  auto items = items_for("A", 7);
  const auto more = items_for("B", 5);
  items.insert(items.begin() + 3, more.begin(), more.end());
  const auto batches = generate_batches(items, {2, 2, 1}, Timestamp{});
  ASSERT_EQ(batches.size(), 4u);
  EXPECT_EQ(batches[0].program, "A");
  EXPECT_EQ(batches[2].program, "B");
  for (const auto& b : batches) {
    for (const auto& id : b.item_ids) EXPECT_EQ(id.substr(0, 1), b.program);
  }
}

TEST(Batches, SaveLoadRoundTrip) {
  TempDir dir;
  const auto batches = generate_batches(items_for("P", 10), {5, 2, 3}, parse_timestamp("2024-01-01T00:00:00Z"));
  save_batches(dir / "b.jsonl", batches);
  EXPECT_EQ(load_batches(dir / "b.jsonl"), batches);
}

TEST(SeededShuffle, IsAPermutation) {
  std::vector<std::size_t> v(100);
  std::iota(v.begin(), v.end(), 0);
  auto w = v;
  seeded_shuffle(w, 42);
  EXPECT_NE(v, w);
  std::sort(w.begin(), w.end());
  EXPECT_EQ(v, w);
}

TEST(Evidence, WhitespaceNormalizedSubstring) {
  const std::vector<std::string> ok = {"Families in the north are still waiting for help.",
                                       "Opposition parties blamed the cabinet."};
  EXPECT_TRUE(verify_evidence(ok, kText));
  const std::vector<std::string> bad = {"sentence not in text"};
  EXPECT_FALSE(verify_evidence(bad, kText));
  EXPECT_EQ(normalize_whitespace("  a \n\t b  "), "a b");
}

TEST(RecordAnnotation, Examples) {
  TempDir dir;
  ItemCatalog catalog({{"x", "P", std::nullopt, "en", kText, word_count(kText)}});
  AnnotationStore store(dir / "a.jsonl");
  FakeClock clock;

  const auto ok = record_annotation(
      draft(Frame::HumanInterest, Frame::Conflict, {"Families in the north are still waiting for help."}),
      catalog, store, clock);
  EXPECT_TRUE(ok.evidence_verified);
  EXPECT_EQ(ok.shown_word_count, word_count(kText));

  const auto flagged = record_annotation(draft(Frame::Conflict, std::nullopt, {"sentence not in text"}),
                                         catalog, store, clock);
  EXPECT_FALSE(flagged.evidence_verified);

  try {
    record_annotation(draft(Frame::Conflict, Frame::Conflict, {}), catalog, store, clock);
    FAIL();
  } catch (const AnnotationError& e) {
    EXPECT_EQ(e.code(), "AlternativeEqualsMain");
  }
  auto unknown = draft(Frame::Conflict, std::nullopt, {});
  unknown.item_id = "nope";
  try {
    record_annotation(unknown, catalog, store, clock);
    FAIL();
  } catch (const AnnotationError& e) {
    EXPECT_EQ(e.code(), "UnknownItem");
  }
  EXPECT_EQ(store.event_count(), 2u);
}

TEST(AnnotationStore, LatestWinsWithAuditTrail) {
  TempDir dir;
  ItemCatalog catalog({{"x", "P", std::nullopt, "en", kText, word_count(kText)}});
  FakeClock clock;
  {
    AnnotationStore store(dir / "a.jsonl");
    record_annotation(draft(Frame::HumanInterest, std::nullopt, {}), catalog, store, clock);
    clock.advance(std::chrono::seconds(5));
    record_annotation(draft(Frame::Economic, std::nullopt, {}), catalog, store, clock);
    auto other = draft(Frame::Morality, std::nullopt, {});
    other.annotator_id = "ann2";
    record_annotation(other, catalog, store, clock);
    const auto current = store.query("x", std::nullopt);
    ASSERT_EQ(current.size(), 2u);
    EXPECT_EQ(current[0].main_frame, Frame::Economic);
    EXPECT_EQ(store.query(std::nullopt, "ann2").size(), 1u);
  }
  AnnotationStore reopened(dir / "a.jsonl");
  EXPECT_EQ(reopened.event_count(), 3u);
  const auto latest = load_annotations(dir / "a.jsonl");
  ASSERT_EQ(latest.size(), 2u);
  EXPECT_EQ(latest[0].main_frame, Frame::Economic);
}

TEST(AnnotationJson, RoundTripAndLabels) {
  auto a = draft(Frame::HumanInterest, Frame::Conflict, {"s"});
  a.comments = "hard one";
  a.submitted_at = parse_timestamp("2024-05-01T10:00:00Z");
  a.shown_word_count = 12;
  EXPECT_EQ(annotation_from_json(to_json(a)), a);

  Json row = {{"item_id", "x"}, {"annotator_id", "a"}, {"main_frame", "Human interest"},
              {"alternative_frame", "none"}};
  const auto parsed = annotation_from_json(row);
  EXPECT_EQ(parsed.main_frame, Frame::HumanInterest);
  EXPECT_FALSE(parsed.alternative_frame.has_value());
  row["main_frame"] = "Sports";
  EXPECT_THROW(annotation_from_json(row), UnknownFrameLabel);
}

TEST(ItemCatalog, PrefersTranslation) {
  TempDir dir;
  TranslationCache cache(dir / "t.jsonl");
  ScriptedTranslator tr({{"x", "hello world"}}, "en");
  FakeClock clock;
  const TranscriptItem item{"x", "P", std::nullopt, "nl", "hallo wereld", 2};
  translate_item(item, tr, cache, clock);
  ItemCatalog catalog({item, {"y", "P", std::nullopt, "nl", "alleen", 1}}, &cache, "en");
  EXPECT_EQ(catalog.find("x")->text, "hello world");
  EXPECT_EQ(catalog.find("x")->variant, TextVariant::translation);
  EXPECT_EQ(catalog.find("y")->text, "alleen");
  EXPECT_EQ(catalog.find("y")->variant, TextVariant::original);
  EXPECT_FALSE(catalog.find("z").has_value());
}
