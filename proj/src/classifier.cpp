#include "frames/classifier.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>

#include "frames/concurrency.hpp"
#include "frames/digest.hpp"

namespace frames {

std::string_view to_string(LlmProviderId id) {
  switch (id) {
    case LlmProviderId::http_llm: return "http_llm";
    case LlmProviderId::scripted: return "scripted";
    case LlmProviderId::lexicon: return "lexicon";
  }
  return "?";
}

LlmProviderId parse_llm_provider(std::string_view name) {
  if (name == "http_llm") return LlmProviderId::http_llm;
  if (name == "scripted") return LlmProviderId::scripted;
  if (name == "lexicon") return LlmProviderId::lexicon;
  throw std::invalid_argument("unknown classifier provider '" + std::string(name) +
                              "' (http_llm|scripted|lexicon)");
}

void ClassifierConfig::validate() const {
  if (!(temperature >= 0.0)) throw std::invalid_argument("temperature must be >= 0");
  if (!(top_p > 0.0 && top_p <= 1.0)) throw std::invalid_argument("top_p must be in (0, 1]");
  if (max_alternatives < 1) throw std::invalid_argument("max_alternatives must be >= 1");
  if (max_tokens < 1) throw std::invalid_argument("max_tokens must be >= 1");
  if (model_id.empty()) throw std::invalid_argument("model_id is empty");
  validate_frame_order(frame_order);
  const bool http = provider_id == LlmProviderId::http_llm;
  const bool has_auth = auth_env.has_value() && !auth_env->empty();
  if (http && (endpoint.empty() || !has_auth)) {
    throw std::invalid_argument("http_llm requires an endpoint and an auth variable");
  }
  if (!http && (!endpoint.empty() || has_auth)) {
    throw std::invalid_argument("endpoint/auth apply to http_llm only");
  }
}

// ---------------------------------------------------------------------------
// Providers

ScriptedCompletionProvider::ScriptedCompletionProvider(std::map<std::string, std::vector<TokenProb>> by_key)
    : by_key_(std::move(by_key)) {}

std::map<std::string, std::vector<TokenProb>> ScriptedCompletionProvider::load_fixture(const std::filesystem::path& path) {
  std::map<std::string, std::vector<TokenProb>> entries;
  for (const auto& row : read_jsonl(path)) {
    std::vector<TokenProb> alts;
    const auto& list = require_field(row, "alternatives");
    if (!list.is_array()) throw std::invalid_argument("alternatives must be an array");
    for (const auto& a : list) alts.push_back(token_prob_from_json(a));
    entries[require_string(row, "key")] = std::move(alts);
  }
  return entries;
}

std::vector<TokenProb> ScriptedCompletionProvider::complete(const CompletionRequest& request) {
  ++calls_;
  if (auto it = by_key_.find(std::string(request.item_id)); it != by_key_.end()) return it->second;
  if (auto it = by_key_.find(sha256_hex(request.text)); it != by_key_.end()) return it->second;
  throw ProviderError(ProviderErrorKind::MissingFixture,
                      "no scripted completion for item '" + std::string(request.item_id) + "'");
}

LexiconCompletionProvider::LexiconCompletionProvider(FrameLexicon lexicon) : lexicon_(std::move(lexicon)) {
  lexicon_.validate();
}

std::vector<TokenProb> LexiconCompletionProvider::complete(const CompletionRequest& request) {
  ++calls_;
  return lexicon_complete(request.text, lexicon_, request.config.frame_order);
}

HttpCompletionProvider::HttpCompletionProvider(const ClassifierConfig& config,
                                               std::shared_ptr<HttpTransport> transport,
                                               std::shared_ptr<Clock> clock)
    : transport_(std::move(transport)), clock_(std::move(clock)) {
  config.validate();
  api_key_ = resolve_secret(*config.auth_env);
}

std::vector<TokenProb> parse_completion_alternatives(std::string_view body) {
  try {
    const auto parsed = Json::parse(body);
    const auto& logprobs = parsed.at("choices").at(0).at("logprobs");
    const auto& top = logprobs.at("top_logprobs");
    if (!top.is_array() || top.empty()) throw std::invalid_argument("top_logprobs is empty");

    std::size_t position = 0;
    if (auto tokens = logprobs.find("tokens"); tokens != logprobs.end() && tokens->is_array()) {
      // Skip leading newlines/spaces the model emits before the answer.
      for (std::size_t i = 0; i < tokens->size() && i < top.size(); ++i) {
        const auto tok = (*tokens)[i].get<std::string>();
        const bool blank = std::all_of(tok.begin(), tok.end(),
                                       [](unsigned char c) { return std::isspace(c); });
        if (!blank) {
          position = i;
          break;
        }
      }
    }
    const auto& alternatives = top.at(position);
    if (!alternatives.is_object()) throw std::invalid_argument("top_logprobs entry is not an object");
    std::vector<TokenProb> out;
    for (const auto& [token, lp] : alternatives.items()) {
      if (!lp.is_number()) throw std::invalid_argument("logprob is not a number");
      out.push_back({token, lp.get<double>()});
    }
    return out;
  } catch (const ProviderError&) {
    throw;
  } catch (const std::exception& e) {
    throw ProviderError(ProviderErrorKind::NonTextResponse,
                        std::string("unexpected completion response: ") + e.what());
  }
}

std::vector<TokenProb> HttpCompletionProvider::complete(const CompletionRequest& request) {
  const auto& cfg = request.config;
  const Json body{{"model", cfg.model_id},
                  {"prompt", request.prompt},
                  {"temperature", cfg.temperature},
                  {"top_p", cfg.top_p},
                  {"max_tokens", cfg.max_tokens},
                  {"logprobs", cfg.max_alternatives},
                  {"n", 1}};
  HttpRequest http;
  http.url = cfg.endpoint;
  http.headers = {{"Authorization", "Bearer " + api_key_}};
  http.body = body.dump();
  const auto response = post_with_retry(*transport_, http, cfg.retry, cfg.timeout, *clock_);
  return parse_completion_alternatives(response.body);
}

std::unique_ptr<CompletionProvider> make_completion_provider(
    const ClassifierConfig& config, std::shared_ptr<HttpTransport> transport,
    std::shared_ptr<Clock> clock, const std::filesystem::path& script_path,
    const std::filesystem::path& lexicon_path) {
  config.validate();
  switch (config.provider_id) {
    case LlmProviderId::lexicon:
      return std::make_unique<LexiconCompletionProvider>(
          lexicon_path.empty() ? FrameLexicon::defaults() : FrameLexicon::load(lexicon_path));
    case LlmProviderId::scripted:
      if (script_path.empty()) throw std::invalid_argument("scripted provider requires a fixture file");
      return std::make_unique<ScriptedCompletionProvider>(ScriptedCompletionProvider::load_fixture(script_path));
    case LlmProviderId::http_llm:
      return std::make_unique<HttpCompletionProvider>(config, std::move(transport), std::move(clock));
  }
  throw std::logic_error("unhandled classifier provider");
}

// ---------------------------------------------------------------------------
// Records

Json to_json(const ClassificationRecord& r) {
  Json alts = Json::array();
  for (const auto& a : r.raw_alternatives) alts.push_back(to_json(a));
  return Json{{"item_id", r.item_id},
              {"model_id", r.model_id},
              {"temperature", r.temperature},
              {"top_p", r.top_p},
              {"prompt_hash", r.prompt_hash},
              {"raw_alternatives", alts},
              {"distribution", to_json(r.distribution)},
              {"word_count", r.word_count},
              {"text_source", r.text_source},
              {"created_at", format_timestamp(r.created_at)}};
}

ClassificationRecord classification_record_from_json(const Json& row) {
  ClassificationRecord r;
  r.item_id = require_string(row, "item_id");
  r.model_id = require_string(row, "model_id");
  r.temperature = require_field(row, "temperature").get<double>();
  r.top_p = require_field(row, "top_p").get<double>();
  r.prompt_hash = require_string(row, "prompt_hash");
  for (const auto& a : require_field(row, "raw_alternatives")) {
    r.raw_alternatives.push_back(token_prob_from_json(a));
  }
  r.distribution = frame_distribution_from_json(require_field(row, "distribution"));
  if (auto it = row.find("word_count"); it != row.end()) r.word_count = it->get<std::size_t>();
  if (auto src = optional_string(row, "text_source")) r.text_source = *src;
  r.created_at = parse_timestamp(require_string(row, "created_at"));
  return r;
}

std::vector<TokenProb> sanitize_alternatives(std::vector<TokenProb> alternatives,
                                             std::size_t max_alternatives) {
  if (alternatives.empty()) {
    throw ProviderError(ProviderErrorKind::NonTextResponse, "provider returned no alternatives");
  }
  for (const auto& a : alternatives) {
    if (!std::isfinite(a.logprob) || a.logprob > 0.0) {
      throw ProviderError(ProviderErrorKind::NonTextResponse,
                          "invalid logprob for token '" + a.token + "'");
    }
  }
  std::stable_sort(alternatives.begin(), alternatives.end(), [](const TokenProb& a, const TokenProb& b) {
    if (a.logprob != b.logprob) return a.logprob > b.logprob;
    return a.token < b.token;
  });
  if (alternatives.size() > max_alternatives) alternatives.resize(max_alternatives);
  double total = 0.0;
  for (const auto& a : alternatives) total += std::exp(a.logprob);
  if (total > 1.0 + 1e-9) {
    throw ProviderError(ProviderErrorKind::NonTextResponse,
                        "alternative probabilities sum to " + std::to_string(total) + " > 1");
  }
  return alternatives;
}

ClassificationRecord classify_item(const ClassifyInput& input, const PromptTemplate& tmpl,
                                   std::span<const FrameDefinition> definitions,
                                   const ClassifierConfig& config, CompletionProvider& provider,
                                   Clock& clock, RateLimiter* limiter) {
  const auto prompt = build_prompt(tmpl, definitions, input.text);
  if (limiter != nullptr) limiter->acquire();
  auto alternatives = provider.complete({input.item_id, prompt, input.text, config});

  ClassificationRecord r;
  r.item_id = input.item_id;
  r.model_id = config.model_id;
  r.temperature = config.temperature;
  r.top_p = config.top_p;
  r.prompt_hash = sha256_hex(prompt);
  r.raw_alternatives =
      sanitize_alternatives(std::move(alternatives), static_cast<std::size_t>(config.max_alternatives));
  r.distribution = extract_distribution(r.raw_alternatives, config.frame_order);
  r.word_count = word_count(input.text);
  r.text_source = input.text_source;
  r.created_at = clock.wall_now();
  return r;
}

// ---------------------------------------------------------------------------
// Store

ClassificationStore::ClassificationStore(std::filesystem::path path) : appender_(std::move(path)) {
  for (const auto& row : read_jsonl_if_exists(appender_.path())) {
    auto r = classification_record_from_json(row);
    index_[{r.item_id, r.model_id, r.prompt_hash}] = records_.size();
    records_.push_back(std::move(r));
  }
}

bool ClassificationStore::contains(const Key& key) const {
  std::lock_guard lock(mu_);
  return index_.count(key) != 0;
}

std::optional<ClassificationRecord> ClassificationStore::find(const Key& key) const {
  std::lock_guard lock(mu_);
  auto it = index_.find(key);
  if (it == index_.end()) return std::nullopt;
  return records_[it->second];
}

void ClassificationStore::append(const std::vector<ClassificationRecord>& records) {
  std::vector<Json> rows;
  rows.reserve(records.size());
  for (const auto& r : records) rows.push_back(to_json(r));
  std::lock_guard lock(mu_);
  appender_.append(rows);
  for (const auto& r : records) {
    index_[{r.item_id, r.model_id, r.prompt_hash}] = records_.size();
    records_.push_back(r);
  }
}

std::vector<ClassificationRecord> ClassificationStore::all() const {
  std::lock_guard lock(mu_);
  return records_;
}

std::vector<ClassificationRecord> load_classifications(const std::filesystem::path& path) {
  std::vector<ClassificationRecord> out;
  for (const auto& row : read_jsonl(path)) out.push_back(classification_record_from_json(row));
  return out;
}

ClassifyCorpusResult classify_corpus(std::span<const ClassifyInput> inputs,
                                     const PromptTemplate& tmpl,
                                     std::span<const FrameDefinition> definitions,
                                     const ClassifierConfig& config, CompletionProvider& provider,
                                     ClassificationStore& store, std::shared_ptr<Clock> clock,
                                     const ClassifyOptions& options) {
  config.validate();
  RateLimiter limiter(config.rate_limit, clock);
  ClassifyCorpusResult result;
  std::atomic<std::size_t> calls{0};
  const std::size_t chunk = std::max<std::size_t>(1, options.flush_every);

  for (std::size_t begin = 0; begin < inputs.size(); begin += chunk) {
    const std::size_t end = std::min(inputs.size(), begin + chunk);
    std::vector<std::optional<ClassificationRecord>> stored(end - begin), fresh(end - begin);
    std::vector<std::optional<ItemFailure>> failed(end - begin);

    parallel_for(end - begin, options.concurrency, [&](std::size_t i) {
      const auto& input = inputs[begin + i];
      try {
        const auto hash = sha256_hex(build_prompt(tmpl, definitions, input.text));
        if (auto hit = store.find({input.item_id, config.model_id, hash})) {
          stored[i] = std::move(hit);
          return;
        }
        ++calls;
        fresh[i] = classify_item(input, tmpl, definitions, config, provider, *clock, &limiter);
      } catch (const FramesError& e) {
        failed[i] = ItemFailure{input.item_id, e.code(), e.what()};
      } catch (const std::exception& e) {
        failed[i] = ItemFailure{input.item_id, "InternalError", e.what()};
      }
    });

    std::vector<ClassificationRecord> to_persist;
    for (auto& r : fresh) {
      if (r) to_persist.push_back(*r);
    }
    store.append(to_persist);
    for (std::size_t i = 0; i < end - begin; ++i) {
      if (stored[i]) result.records.push_back(std::move(*stored[i]));
      else if (fresh[i]) result.records.push_back(std::move(*fresh[i]));
      else if (failed[i]) result.failures.push_back(std::move(*failed[i]));
    }
  }
  result.provider_calls = calls;
  return result;
}

}  // namespace frames
