#include "frames/translation.hpp"

#include <algorithm>
#include <cctype>

#include "frames/concurrency.hpp"

namespace frames {

std::string_view to_string(TranslationProviderId id) {
  switch (id) {
    case TranslationProviderId::http_mt: return "http_mt";
    case TranslationProviderId::passthrough: return "passthrough";
    case TranslationProviderId::scripted: return "scripted";
  }
  return "?";
}

TranslationProviderId parse_translation_provider(std::string_view name) {
  if (name == "http_mt") return TranslationProviderId::http_mt;
  if (name == "passthrough") return TranslationProviderId::passthrough;
  if (name == "scripted") return TranslationProviderId::scripted;
  throw std::invalid_argument("unknown translation provider '" + std::string(name) +
                              "' (http_mt|passthrough|scripted)");
}

void TranslationProviderConfig::validate() const {
  const bool http = provider_id == TranslationProviderId::http_mt;
  const bool has_auth = auth_env.has_value() && !auth_env->empty();
  if (http && (endpoint.empty() || !has_auth)) {
    throw std::invalid_argument("http_mt requires an endpoint and an auth variable");
  }
  if (!http && (!endpoint.empty() || has_auth)) {
    throw std::invalid_argument("endpoint/auth apply to http_mt only");
  }
  if (provider_id == TranslationProviderId::scripted && script_path.empty()) {
    throw std::invalid_argument("scripted translation requires a fixture file");
  }
  if (target_language.empty()) throw std::invalid_argument("target language is empty");
}

Json to_json(const TranslationRecord& r) {
  return Json{{"item_id", r.item_id},
              {"provider_id", r.provider_id},
              {"source_language", r.source_language},
              {"target_language", r.target_language},
              {"translated_text", r.translated_text},
              {"translated_word_count", r.translated_word_count},
              {"created_at", format_timestamp(r.created_at)}};
}

TranslationRecord translation_record_from_json(const Json& row) {
  TranslationRecord r;
  r.item_id = require_string(row, "item_id");
  r.provider_id = require_string(row, "provider_id");
  r.source_language = require_string(row, "source_language");
  r.target_language = require_string(row, "target_language");
  r.translated_text = require_string(row, "translated_text");
  r.translated_word_count = require_field(row, "translated_word_count").get<std::size_t>();
  r.created_at = parse_timestamp(require_string(row, "created_at"));
  if (r.translated_word_count != word_count(r.translated_text)) {
    throw std::invalid_argument("translated_word_count does not match translated_text");
  }
  return r;
}

ScriptedTranslator::ScriptedTranslator(std::map<std::string, std::string> by_item_id,
                                       std::string target_language)
    : by_item_id_(std::move(by_item_id)), target_(std::move(target_language)) {}

std::map<std::string, std::string> ScriptedTranslator::load_fixture(const std::filesystem::path& path) {
  std::map<std::string, std::string> entries;
  for (const auto& row : read_jsonl(path)) {
    entries[require_string(row, "key")] = require_string(row, "text");
  }
  return entries;
}

std::string ScriptedTranslator::translate(const TranscriptItem& item) {
  ++calls_;
  auto it = by_item_id_.find(item.item_id);
  if (it == by_item_id_.end()) {
    throw ProviderError(ProviderErrorKind::MissingFixture,
                        "no scripted translation for item '" + item.item_id + "'");
  }
  return it->second;
}

namespace {
std::string upper(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return static_cast<char>(std::toupper(c)); });
  return s;
}
}  // namespace

HttpTranslator::HttpTranslator(TranslationProviderConfig config,
                               std::shared_ptr<HttpTransport> transport, std::shared_ptr<Clock> clock)
    : config_(std::move(config)), transport_(std::move(transport)), clock_(std::move(clock)) {
  config_.validate();
  api_key_ = resolve_secret(*config_.auth_env);
}

std::string HttpTranslator::translate(const TranscriptItem& item) {
  Json body{{"text", Json::array({item.text})}, {"target_lang", upper(config_.target_language)}};
  if (!item.language.empty() && item.language != "und") body["source_lang"] = upper(item.language);

  HttpRequest request;
  request.url = config_.endpoint;
  request.headers = {{"Authorization", config_.auth_scheme + " " + api_key_}};
  request.body = body.dump();
  const auto response = post_with_retry(*transport_, request, config_.retry, config_.timeout, *clock_);

  try {
    const auto parsed = Json::parse(response.body);
    const auto& text = parsed.at("translations").at(0).at("text");
    if (!text.is_string()) throw std::invalid_argument("translation is not a string");
    return text.get<std::string>();
  } catch (const std::exception& e) {
    throw ProviderError(ProviderErrorKind::NonTextResponse,
                        "unexpected translation response: " + std::string(e.what()));
  }
}

std::unique_ptr<Translator> make_translator(const TranslationProviderConfig& config,
                                            std::shared_ptr<HttpTransport> transport,
                                            std::shared_ptr<Clock> clock) {
  config.validate();
  switch (config.provider_id) {
    case TranslationProviderId::passthrough:
      return std::make_unique<PassthroughTranslator>();
    case TranslationProviderId::scripted:
      return std::make_unique<ScriptedTranslator>(
          ScriptedTranslator::load_fixture(config.script_path), config.target_language);
    case TranslationProviderId::http_mt:
      return std::make_unique<HttpTranslator>(config, std::move(transport), std::move(clock));
  }
  throw std::logic_error("unhandled translation provider");
}

TranslationCache::TranslationCache(std::filesystem::path path) : appender_(std::move(path)) {
  for (const auto& row : read_jsonl_if_exists(appender_.path())) {
    auto r = translation_record_from_json(row);
    by_item_target_[{r.item_id, r.target_language}] = r;
    by_key_[{r.item_id, r.provider_id, r.target_language}] = std::move(r);
  }
}

std::optional<TranslationRecord> TranslationCache::find(const Key& key) const {
  std::lock_guard lock(mu_);
  auto it = by_key_.find(key);
  if (it == by_key_.end()) return std::nullopt;
  return it->second;
}

std::optional<TranslationRecord> TranslationCache::find_any(const std::string& item_id,
                                                            const std::string& target_language) const {
  std::lock_guard lock(mu_);
  auto it = by_item_target_.find({item_id, target_language});
  if (it == by_item_target_.end()) return std::nullopt;
  return it->second;
}

void TranslationCache::append(const std::vector<TranslationRecord>& records) {
  std::vector<Json> rows;
  rows.reserve(records.size());
  for (const auto& r : records) rows.push_back(to_json(r));
  std::lock_guard lock(mu_);
  appender_.append(rows);
  for (const auto& r : records) {
    by_item_target_[{r.item_id, r.target_language}] = r;
    by_key_[{r.item_id, r.provider_id, r.target_language}] = r;
  }
}

std::size_t TranslationCache::size() const {
  std::lock_guard lock(mu_);
  return by_key_.size();
}

namespace {

TranslationRecord call_provider(const TranscriptItem& item, Translator& translator, Clock& clock) {
  TranslationRecord r;
  r.item_id = item.item_id;
  r.provider_id = translator.provider_id();
  r.source_language = item.language;
  r.target_language = translator.target_language_for(item);
  r.translated_text = translator.translate(item);
  r.translated_word_count = word_count(r.translated_text);
  r.created_at = clock.wall_now();
  return r;
}

}  // namespace

TranslationRecord translate_item(const TranscriptItem& item, Translator& translator,
                                 TranslationCache& cache, Clock& clock, bool force) {
  if (!force) {
    if (auto hit = cache.find({item.item_id, translator.provider_id(), translator.target_language_for(item)})) {
      return *hit;
    }
  }
  auto record = call_provider(item, translator, clock);
  cache.append({record});
  return record;
}

TranslateCorpusResult translate_corpus(std::span<const TranscriptItem> items,
                                       Translator& translator, TranslationCache& cache,
                                       Clock& clock, const TranslateOptions& options) {
  TranslateCorpusResult result;
  const std::size_t chunk = std::max<std::size_t>(1, options.flush_every);
  std::atomic<std::size_t> calls{0};

  for (std::size_t begin = 0; begin < items.size(); begin += chunk) {
    const std::size_t end = std::min(items.size(), begin + chunk);
    std::vector<std::optional<TranslationRecord>> cached(end - begin);
    std::vector<std::optional<TranslationRecord>> fresh(end - begin);
    std::vector<std::optional<ItemFailure>> failed(end - begin);

    parallel_for(end - begin, options.concurrency, [&](std::size_t i) {
      const auto& item = items[begin + i];
      if (!options.force) {
        if (auto hit = cache.find({item.item_id, translator.provider_id(),
                                   translator.target_language_for(item)})) {
          cached[i] = std::move(hit);
          return;
        }
      }
      ++calls;
      try {
        fresh[i] = call_provider(item, translator, clock);
      } catch (const FramesError& e) {
        failed[i] = ItemFailure{item.item_id, e.code(), e.what()};
      } catch (const std::exception& e) {
        failed[i] = ItemFailure{item.item_id, "InternalError", e.what()};
      }
    });

    std::vector<TranslationRecord> to_persist;
    for (std::size_t i = 0; i < end - begin; ++i) {
      if (fresh[i]) to_persist.push_back(*fresh[i]);
    }
    cache.append(to_persist);
    for (std::size_t i = 0; i < end - begin; ++i) {
      if (cached[i]) result.records.push_back(std::move(*cached[i]));
      else if (fresh[i]) result.records.push_back(std::move(*fresh[i]));
      else if (failed[i]) result.failures.push_back(std::move(*failed[i]));
    }
  }
  result.provider_calls = calls;
  return result;
}

}  // namespace frames
