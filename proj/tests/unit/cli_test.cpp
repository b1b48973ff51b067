#include <gtest/gtest.h>

#include "frames/annotation.hpp"
#include "frames/classifier.hpp"
#include "frames/corpus.hpp"
#include "frames/store_lock.hpp"
#include "support.hpp"

using namespace frames;
using frames::testing::run_cli;
using frames::testing::TempDir;
using frames::testing::write_text;

namespace {

std::string p(const TempDir& d, const std::string& name) { return (d / name).string(); }

void write_small_corpus(const TempDir& dir) {
  write_text(dir / "corpus.csv",
             "item_id,program,language,text\n"
             "a,P,en,\"the army attacked the rebels and fighting escalated\"\n"
             "b,P,en,\"tax money and the budget\"\n"
             "c,Q,en,\"families feel the emotional cost\"\n"
             "d,Q,en,\"blame the government for the policy\"\n");
}

}  // namespace

TEST(Cli, IngestCsvReportsRowCount) {
  TempDir dir;
  write_small_corpus(dir);
  const auto r = run_cli({"ingest", "--input", p(dir, "corpus.csv"), "--format", "csv", "--out",
                          p(dir, "corpus.jsonl")});
  EXPECT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("4 item(s)"), std::string::npos);
  EXPECT_EQ(load_corpus(dir / "corpus.jsonl").size(), 4u);
}

TEST(Cli, MalformedRowsExitPartial) {
  TempDir dir;
  write_text(dir / "c.jsonl", R"({"item_id":"a","program":"P","text":"x"})" "\n{bad\n");
  const auto r = run_cli({"ingest", "--input", p(dir, "c.jsonl"), "--out", p(dir, "corpus.jsonl")});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find(":2:"), std::string::npos) << r.err;
}

TEST(Cli, UsageErrorsExitTwoWithSynopsis) {
  for (const auto& args : std::vector<std::vector<std::string>>{
           {}, {"frobnicate"}, {"ingest"}, {"classify", "--provider", "gpt"}, {"batches", "--per-batch", "0"}}) {
    const auto r = run_cli(args);
    EXPECT_EQ(r.code, 2);
    EXPECT_NE(r.err.find("Usage"), std::string::npos) << r.err;
  }
  const auto r = run_cli({"classify", "--provider", "lexicon", "--endpoint", "http://x"});
  EXPECT_EQ(r.code, 2);
}

TEST(Cli, ClassifyLexiconMatchesHitRecount) {
  TempDir dir;
  write_small_corpus(dir);
  ASSERT_EQ(run_cli({"ingest", "--input", p(dir, "corpus.csv"), "--format", "csv", "--out",
                     p(dir, "corpus.jsonl")}).code, 0);
  frames::testing::NetworkForbidden guard;
  const auto r = run_cli({"classify", "--provider", "lexicon", "--corpus", p(dir, "corpus.jsonl"), "--out",
                          p(dir, "classifications.jsonl")});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(guard.attempts(), 0u);
  const auto records = load_classifications(dir / "classifications.jsonl");
  ASSERT_EQ(records.size(), 4u);
  // Expected frame from counting keywords in each text by hand.
  const std::map<std::string, Frame> expected = {{"a", Frame::Conflict},
                                                 {"b", Frame::Economic},
                                                 {"c", Frame::HumanInterest},
                                                 {"d", Frame::AttributionOfResponsibility}};
  for (const auto& rec : records) EXPECT_EQ(rec.distribution.predominant, expected.at(rec.item_id)) << rec.item_id;
  // "families feel the emotional cost": three human-interest hits, one economic.
  const auto c = std::find_if(records.begin(), records.end(), [](const auto& x) { return x.item_id == "c"; });
  EXPECT_NEAR(c->distribution[Frame::HumanInterest], 0.75, 1e-12);
  EXPECT_NEAR(c->distribution[Frame::Economic], 0.25, 1e-12);
}

TEST(Cli, ClassifyFailuresAreReported) {
  TempDir dir;
  write_text(dir / "c.jsonl", R"({"item_id":"a","program":"P","text":"war"})" "\n"
                              R"({"item_id":"b","program":"P","text":"nothing relevant"})" "\n");
  ASSERT_EQ(run_cli({"ingest", "--input", p(dir, "c.jsonl"), "--out", p(dir, "corpus.jsonl")}).code, 0);
  const auto r = run_cli({"classify", "--corpus", p(dir, "corpus.jsonl"), "--out", p(dir, "cls.jsonl")});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.out.find("NoUsableTokens=1"), std::string::npos) << r.out;
  const auto failures = read_jsonl(dir / "cls.jsonl.failures.jsonl");
  ASSERT_EQ(failures.size(), 1u);
  EXPECT_EQ(failures[0]["item_id"], "b");
  EXPECT_EQ(failures[0]["error"], "NoUsableTokens");
}

TEST(Cli, HttpProviderWithoutKeyFailsPerItem) {
  TempDir dir;
  write_text(dir / "c.jsonl", R"({"item_id":"a","program":"P","text":"war"})" "\n");
  ASSERT_EQ(run_cli({"ingest", "--input", p(dir, "c.jsonl"), "--out", p(dir, "corpus.jsonl")}).code, 0);
  ::unsetenv("FRAMES_LLM_API_KEY");
  frames::testing::NetworkForbidden guard;
  const auto r = run_cli({"classify", "--provider", "http_llm", "--endpoint", "http://127.0.0.1:9/v1/completions",
                          "--corpus", p(dir, "corpus.jsonl"), "--out", p(dir, "cls.jsonl")});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("AuthFailure"), std::string::npos) << r.err;
  EXPECT_EQ(guard.attempts(), 0u);
}

TEST(Cli, AnalyzeWritesFiveReports) {
  TempDir dir;
  write_small_corpus(dir);
  ASSERT_EQ(run_cli({"ingest", "--input", p(dir, "corpus.csv"), "--format", "csv", "--out",
                     p(dir, "corpus.jsonl")}).code, 0);
  ASSERT_EQ(run_cli({"classify", "--corpus", p(dir, "corpus.jsonl"), "--out", p(dir, "c.jsonl")}).code, 0);
  write_text(dir / "a.jsonl", R"({"item_id":"a","annotator_id":"x","main_frame":"Conflict"})" "\n"
                              R"({"item_id":"b","annotator_id":"x","main_frame":"Morality"})" "\n");
  const auto r = run_cli({"analyze", "--annotations", p(dir, "a.jsonl"), "--classifications", p(dir, "c.jsonl"),
                          "--out", p(dir, "reports")});
  ASSERT_EQ(r.code, 0) << r.err;
  for (const char* f : {"confusion.csv", "agreement.json", "length_bins.csv", "prob_hist.csv",
                        "alternatives_bins.csv"}) {
    EXPECT_TRUE(std::filesystem::exists(dir / "reports" / f)) << f;
  }
  EXPECT_NE(r.out.find("accuracy 0.5"), std::string::npos) << r.out;

  const auto e = run_cli({"export", "--format", "json", "--annotations", p(dir, "a.jsonl"), "--classifications",
                          p(dir, "c.jsonl"), "--out", p(dir, "json")});
  ASSERT_EQ(e.code, 0) << e.err;
  EXPECT_TRUE(std::filesystem::exists(dir / "json" / "confusion.json"));
}

TEST(Cli, StatsCsv) {
  TempDir dir;
  write_small_corpus(dir);
  ASSERT_EQ(run_cli({"ingest", "--input", p(dir, "corpus.csv"), "--format", "csv", "--out",
                     p(dir, "corpus.jsonl")}).code, 0);
  const auto r = run_cli({"stats", "--corpus", p(dir, "corpus.jsonl")});
  ASSERT_EQ(r.code, 0);
  EXPECT_EQ(r.out, "program,count,mean_words,min_words,max_words\nP,2,6.5,5,8\nQ,2,5.5,5,6\n");
}

TEST(Cli, ConfigPrecedenceFlagOverEnvOverFile) {
  TempDir dir;
  std::string text;
  for (int i = 0; i < 12; ++i) {
    text += R"({"item_id":"i)" + std::to_string(i) + R"(","program":"P","text":"x"})" "\n";
  }
  write_text(dir / "c.jsonl", text);
  ASSERT_EQ(run_cli({"ingest", "--input", p(dir, "c.jsonl"), "--out", p(dir, "corpus.jsonl")}).code, 0);
  write_text(dir / "frames.toml", "[batches]\nseed = 11\nper-batch = 3\nn-batches = 2\n");

  auto batches_with = [&](std::vector<std::string> extra) {
    std::vector<std::string> args = {"--config", p(dir, "frames.toml"), "batches", "--corpus",
                                     p(dir, "corpus.jsonl"), "--out", p(dir, "b.jsonl")};
    args.insert(args.end(), extra.begin(), extra.end());
    const auto r = run_cli(args);
    EXPECT_EQ(r.code, 0) << r.err;
    return load_batches(dir / "b.jsonl");
  };
  auto reference = [&](std::uint64_t seed) {
    const auto items = load_corpus(dir / "corpus.jsonl");
    return generate_batches(items, {3, 2, seed}, Timestamp{});
  };
  auto ids = [](const std::vector<AnnotationBatch>& bs) {
    std::vector<std::vector<std::string>> out;
    for (const auto& b : bs) out.push_back(b.item_ids);
    return out;
  };

  ::unsetenv("FRAMES_SEED");
  EXPECT_EQ(ids(batches_with({})), ids(reference(11)));
  ::setenv("FRAMES_SEED", "12", 1);
  EXPECT_EQ(ids(batches_with({})), ids(reference(12)));
  EXPECT_EQ(ids(batches_with({"--seed", "13"})), ids(reference(13)));
  ::unsetenv("FRAMES_SEED");
}

TEST(Cli, UnknownConfigKeyIsUsageError) {
  TempDir dir;
  write_text(dir / "frames.toml", "[batches]\nper_batch = 3\n");
  const auto r = run_cli({"--config", p(dir, "frames.toml"), "batches", "--out", p(dir, "b.jsonl")});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("per_batch"), std::string::npos) << r.err;
}

TEST(Cli, ShowConfigPrintsEffectiveValues) {
  TempDir dir;
  write_small_corpus(dir);
  ASSERT_EQ(run_cli({"ingest", "--input", p(dir, "corpus.csv"), "--format", "csv", "--out",
                     p(dir, "corpus.jsonl")}).code, 0);
  const auto r = run_cli({"--show-config", "batches", "--corpus", p(dir, "corpus.jsonl"), "--out",
                          p(dir, "b.jsonl"), "--per-batch", "1", "--n-batches", "2", "--seed", "99"});
  EXPECT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("seed=99"), std::string::npos) << r.out;
}

TEST(Cli, LockedStoreIsRefused) {
  TempDir dir;
  write_small_corpus(dir);
  StoreLock held(dir.path());
  const auto r = run_cli({"ingest", "--input", p(dir, "corpus.csv"), "--format", "csv", "--out",
                          p(dir, "corpus.jsonl")});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("StoreLocked"), std::string::npos) << r.err;
}

TEST(Cli, OfflineSubcommandsOpenNoConnections) {
  TempDir dir;
  write_small_corpus(dir);
  write_text(dir / "t.jsonl", R"({"key":"a","text":"A"})" "\n" R"({"key":"b","text":"B"})" "\n"
                              R"({"key":"c","text":"C"})" "\n" R"({"key":"d","text":"D"})" "\n");
  write_text(dir / "a.jsonl", R"({"item_id":"a","annotator_id":"x","main_frame":"Conflict"})" "\n");
  frames::testing::NetworkForbidden guard;
  const std::vector<std::vector<std::string>> steps = {
      {"ingest", "--input", p(dir, "corpus.csv"), "--format", "csv", "--out", p(dir, "corpus.jsonl")},
      {"stats", "--corpus", p(dir, "corpus.jsonl")},
      {"translate", "--corpus", p(dir, "corpus.jsonl"), "--provider", "scripted", "--script", p(dir, "t.jsonl"),
       "--cache", p(dir, "translations.jsonl")},
      {"classify", "--corpus", p(dir, "corpus.jsonl"), "--out", p(dir, "c.jsonl")},
      {"batches", "--corpus", p(dir, "corpus.jsonl"), "--out", p(dir, "b.jsonl"), "--per-batch", "1",
       "--n-batches", "2"},
      {"analyze", "--annotations", p(dir, "a.jsonl"), "--classifications", p(dir, "c.jsonl"), "--out",
       p(dir, "reports")},
      {"export", "--annotations", p(dir, "a.jsonl"), "--classifications", p(dir, "c.jsonl"), "--out",
       p(dir, "reports-json"), "--format", "json"},
  };
  for (const auto& args : steps) {
    const auto r = run_cli(args);
    EXPECT_EQ(r.code, 0) << args[0] << ": " << r.err;
  }
  EXPECT_EQ(guard.attempts(), 0u);
}
