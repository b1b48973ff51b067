#pragma once

#include <atomic>
#include <chrono>
#include <cstddef>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <tuple>
#include <vector>

#include "frames/clock.hpp"
#include "frames/corpus.hpp"
#include "frames/failure.hpp"
#include "frames/http.hpp"

namespace frames {

enum class TranslationProviderId { http_mt, passthrough, scripted };

std::string_view to_string(TranslationProviderId id);
TranslationProviderId parse_translation_provider(std::string_view name);

struct TranslationProviderConfig {
  TranslationProviderId provider_id = TranslationProviderId::passthrough;
  std::string endpoint;                 // http_mt only
  std::optional<std::string> auth_env;  // name of the env var holding the key; http_mt only
  std::string auth_scheme = "DeepL-Auth-Key";
  std::string target_language = "en";
  std::chrono::milliseconds timeout{30000};
  RetryPolicy retry;
  std::filesystem::path script_path;  // scripted only

  // Throws std::invalid_argument: endpoint and auth are required iff http_mt.
  void validate() const;
};

struct TranslationRecord {
  std::string item_id;
  std::string provider_id;
  std::string source_language;
  std::string target_language;
  std::string translated_text;
  std::size_t translated_word_count = 0;
  Timestamp created_at{};

  bool operator==(const TranslationRecord&) const = default;
};

Json to_json(const TranslationRecord& r);
TranslationRecord translation_record_from_json(const Json& row);

class Translator {
 public:
  virtual ~Translator() = default;
  virtual std::string provider_id() const = 0;
  // Language the provider will actually produce for this item.
  virtual std::string target_language_for(const TranscriptItem& item) const = 0;
  virtual std::string translate(const TranscriptItem& item) = 0;
};

// Identity provider; the target language is the item's own language.
class PassthroughTranslator final : public Translator {
 public:
  std::string provider_id() const override { return "passthrough"; }
  std::string target_language_for(const TranscriptItem& item) const override {
    return item.language;
  }
  std::string translate(const TranscriptItem& item) override { return item.text; }
};

// Fixture-driven provider. Fixture file: JSONL of {"key": item_id, "text": ...}.
class ScriptedTranslator final : public Translator {
 public:
  ScriptedTranslator(std::map<std::string, std::string> by_item_id, std::string target_language);
  static std::map<std::string, std::string> load_fixture(const std::filesystem::path& path);

  std::string provider_id() const override { return "scripted"; }
  std::string target_language_for(const TranscriptItem&) const override { return target_; }
  std::string translate(const TranscriptItem& item) override;
  std::size_t calls() const noexcept { return calls_; }

 private:
  std::map<std::string, std::string> by_item_id_;
  std::string target_;
  std::atomic<std::size_t> calls_{0};
};

// Generic MT endpoint, DeepL-compatible wire format:
//   request  {"text": [source], "target_lang": "EN", "source_lang": "NL"}
//   response {"translations": [{"text": ...}]}
class HttpTranslator final : public Translator {
 public:
  HttpTranslator(TranslationProviderConfig config, std::shared_ptr<HttpTransport> transport,
                 std::shared_ptr<Clock> clock);

  std::string provider_id() const override { return "http_mt"; }
  std::string target_language_for(const TranscriptItem&) const override {
    return config_.target_language;
  }
  std::string translate(const TranscriptItem& item) override;

 private:
  TranslationProviderConfig config_;
  std::shared_ptr<HttpTransport> transport_;
  std::shared_ptr<Clock> clock_;
  std::string api_key_;
};

std::unique_ptr<Translator> make_translator(const TranslationProviderConfig& config,
                                            std::shared_ptr<HttpTransport> transport,
                                            std::shared_ptr<Clock> clock);

// translations.jsonl. Keyed by (item_id, provider_id, target_language); the
// latest line for a key wins. Appends only.
class TranslationCache {
 public:
  using Key = std::tuple<std::string, std::string, std::string>;

  explicit TranslationCache(std::filesystem::path path);

  std::optional<TranslationRecord> find(const Key& key) const;
  // Latest record for the item into `target_language`, from any provider.
  std::optional<TranslationRecord> find_any(const std::string& item_id,
                                            const std::string& target_language) const;
  void append(const std::vector<TranslationRecord>& records);
  std::size_t size() const;
  const std::filesystem::path& path() const noexcept { return appender_.path(); }

 private:
  mutable std::mutex mu_;
  std::map<Key, TranslationRecord> by_key_;
  std::map<std::pair<std::string, std::string>, TranslationRecord> by_item_target_;
  JsonlAppender appender_;
};

// Cache hit returns the stored record without calling the provider. On a miss
// the provider is called and the record persisted. `force` skips the lookup.
TranslationRecord translate_item(const TranscriptItem& item, Translator& translator,
                                 TranslationCache& cache, Clock& clock, bool force = false);

struct TranslateOptions {
  std::size_t concurrency = 4;
  bool force = false;
  std::size_t flush_every = 64;  // records are persisted in input order per chunk
};

struct TranslateCorpusResult {
  std::vector<TranslationRecord> records;  // input order, failures omitted
  std::vector<ItemFailure> failures;
  std::size_t provider_calls = 0;
};

TranslateCorpusResult translate_corpus(std::span<const TranscriptItem> items,
                                       Translator& translator, TranslationCache& cache,
                                       Clock& clock, const TranslateOptions& options = {});

}  // namespace frames
