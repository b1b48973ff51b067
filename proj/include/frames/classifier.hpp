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
#include "frames/distribution.hpp"
#include "frames/failure.hpp"
#include "frames/http.hpp"
#include "frames/lexicon.hpp"
#include "frames/prompt.hpp"

namespace frames {

enum class LlmProviderId { http_llm, scripted, lexicon };

std::string_view to_string(LlmProviderId id);
LlmProviderId parse_llm_provider(std::string_view name);

inline constexpr std::string_view kDefaultLlmModel = "text-davinci-003";

struct ClassifierConfig {
  LlmProviderId provider_id = LlmProviderId::lexicon;
  std::string model_id = "lexicon";
  double temperature = 0.0;
  double top_p = 1.0;
  int max_alternatives = 5;
  int max_tokens = 8;
  std::string endpoint;                 // http_llm only
  std::optional<std::string> auth_env;  // http_llm only
  std::chrono::milliseconds timeout{60000};
  RetryPolicy retry;
  double rate_limit = 0.0;  // requests per second; <= 0 means unlimited
  FrameOrder frame_order = kDefaultFrameOrder;

  // Throws std::invalid_argument on temperature < 0, top_p outside (0, 1],
  // max_alternatives < 1, or http settings on a non-http provider.
  void validate() const;
};

struct CompletionRequest {
  std::string_view item_id;
  std::string_view prompt;
  std::string_view text;  // the transcript embedded in the prompt
  const ClassifierConfig& config;
};

// A completion-style model: returns the alternatives for the first answer token.
class CompletionProvider {
 public:
  virtual ~CompletionProvider() = default;
  virtual std::vector<TokenProb> complete(const CompletionRequest& request) = 0;
};

// Fixture JSONL of {"key": item_id or sha256(text), "alternatives": [{token, logprob}]}.
class ScriptedCompletionProvider final : public CompletionProvider {
 public:
  explicit ScriptedCompletionProvider(std::map<std::string, std::vector<TokenProb>> by_key);
  static std::map<std::string, std::vector<TokenProb>> load_fixture(const std::filesystem::path& path);

  std::vector<TokenProb> complete(const CompletionRequest& request) override;
  std::size_t calls() const noexcept { return calls_; }

 private:
  std::map<std::string, std::vector<TokenProb>> by_key_;
  std::atomic<std::size_t> calls_{0};
};

// Offline keyword scorer behind the provider interface.
class LexiconCompletionProvider final : public CompletionProvider {
 public:
  explicit LexiconCompletionProvider(FrameLexicon lexicon);
  std::vector<TokenProb> complete(const CompletionRequest& request) override;
  std::size_t calls() const noexcept { return calls_; }

 private:
  FrameLexicon lexicon_;
  std::atomic<std::size_t> calls_{0};
};

// Legacy completions protocol:
//   request  {"model", "prompt", "temperature", "top_p", "max_tokens", "logprobs": k, "n": 1}
//   response {"choices": [{"text", "logprobs": {"tokens": [...], "top_logprobs": [{tok: lp}, ...]}}]}
// The alternatives are read at the first generated token that is not pure
// whitespace.
class HttpCompletionProvider final : public CompletionProvider {
 public:
  HttpCompletionProvider(const ClassifierConfig& config, std::shared_ptr<HttpTransport> transport,
                         std::shared_ptr<Clock> clock);
  std::vector<TokenProb> complete(const CompletionRequest& request) override;

 private:
  std::shared_ptr<HttpTransport> transport_;
  std::shared_ptr<Clock> clock_;
  std::string api_key_;
};

// Parses a completions response body into first-answer-token alternatives.
std::vector<TokenProb> parse_completion_alternatives(std::string_view body);

std::unique_ptr<CompletionProvider> make_completion_provider(
    const ClassifierConfig& config, std::shared_ptr<HttpTransport> transport,
    std::shared_ptr<Clock> clock, const std::filesystem::path& script_path,
    const std::filesystem::path& lexicon_path);

struct ClassificationRecord {
  std::string item_id;
  std::string model_id;
  double temperature = 0.0;
  double top_p = 1.0;
  std::string prompt_hash;
  std::vector<TokenProb> raw_alternatives;
  FrameDistribution distribution;
  std::size_t word_count = 0;  // of the classified text
  std::string text_source = "original";  // "original" or "translation"
  Timestamp created_at{};

  bool operator==(const ClassificationRecord&) const = default;
};

Json to_json(const ClassificationRecord& r);
ClassificationRecord classification_record_from_json(const Json& row);

// Checks a provider's alternatives: nonempty, finite logprobs <= 0, and
// total probability <= 1 + 1e-9. Keeps the `max_alternatives` most likely.
std::vector<TokenProb> sanitize_alternatives(std::vector<TokenProb> alternatives,
                                             std::size_t max_alternatives);

struct ClassifyInput {
  std::string item_id;
  std::string text;
  std::string text_source = "original";
};

// Builds the prompt, calls the provider and derives the distribution.
// Provider errors propagate; NoUsableTokens is thrown for off-format answers.
ClassificationRecord classify_item(const ClassifyInput& input, const PromptTemplate& tmpl,
                                   std::span<const FrameDefinition> definitions,
                                   const ClassifierConfig& config, CompletionProvider& provider,
                                   Clock& clock, RateLimiter* limiter = nullptr);

// classifications.jsonl keyed by (item_id, model_id, prompt_hash).
class ClassificationStore {
 public:
  using Key = std::tuple<std::string, std::string, std::string>;

  explicit ClassificationStore(std::filesystem::path path);

  bool contains(const Key& key) const;
  std::optional<ClassificationRecord> find(const Key& key) const;
  void append(const std::vector<ClassificationRecord>& records);
  std::vector<ClassificationRecord> all() const;  // file order
  const std::filesystem::path& path() const noexcept { return appender_.path(); }

 private:
  mutable std::mutex mu_;
  std::vector<ClassificationRecord> records_;
  std::map<Key, std::size_t> index_;
  JsonlAppender appender_;
};

std::vector<ClassificationRecord> load_classifications(const std::filesystem::path& path);

struct ClassifyOptions {
  std::size_t concurrency = 4;
  std::size_t flush_every = 64;
};

struct ClassifyCorpusResult {
  std::vector<ClassificationRecord> records;  // input order, stored or new
  std::vector<ItemFailure> failures;
  std::size_t provider_calls = 0;
};

ClassifyCorpusResult classify_corpus(std::span<const ClassifyInput> inputs,
                                     const PromptTemplate& tmpl,
                                     std::span<const FrameDefinition> definitions,
                                     const ClassifierConfig& config, CompletionProvider& provider,
                                     ClassificationStore& store, std::shared_ptr<Clock> clock,
                                     const ClassifyOptions& options = {});

}  // namespace frames
