#include "frames/annotation.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <limits>
#include <random>

#include "frames/translation.hpp"

namespace frames {

// ---------------------------------------------------------------------------
// Batches

void seeded_shuffle(std::vector<std::size_t>& values, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  auto bounded = [&rng](std::uint64_t bound) {  // uniform in [0, bound)
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                                std::numeric_limits<std::uint64_t>::max() % bound;
    std::uint64_t x;
    do {
      x = rng();
    } while (x >= limit);
    return x % bound;
  };
  for (std::size_t i = values.size(); i > 1; --i) {
    std::swap(values[i - 1], values[bounded(i)]);
  }
}

std::vector<AnnotationBatch> generate_batches(std::span<const TranscriptItem> items,
                                              const BatchOptions& options, Timestamp created_at) {
  if (options.per_batch == 0 || options.n_batches == 0) {
    throw std::invalid_argument("per_batch and n_batches must be positive");
  }
  std::vector<std::string> programs;
  std::map<std::string, std::vector<std::size_t>> by_program;
  for (std::size_t i = 0; i < items.size(); ++i) {
    auto [it, inserted] = by_program.try_emplace(items[i].program);
    if (inserted) programs.push_back(items[i].program);
    it->second.push_back(i);
  }

  const std::size_t needed = options.per_batch * options.n_batches;
  for (const auto& program : programs) {
    const auto available = by_program[program].size();
    if (available < needed) throw InsufficientItems(program, needed, available);
  }

  std::vector<AnnotationBatch> batches;
  for (std::size_t p = 0; p < programs.size(); ++p) {
    auto indices = by_program[programs[p]];
    // Distinct stream per program, stable under adding other programs.
    std::uint64_t program_seed = options.seed;
    for (unsigned char c : programs[p]) program_seed = program_seed * 1099511628211ULL ^ c;
    seeded_shuffle(indices, program_seed);

    for (std::size_t b = 0; b < options.n_batches; ++b) {
      AnnotationBatch batch;
      char suffix[16];
      std::snprintf(suffix, sizeof suffix, "-%02zu", b + 1);
      batch.batch_id = programs[p] + suffix;
      batch.program = programs[p];
      batch.created_at = created_at;
      for (std::size_t k = 0; k < options.per_batch; ++k) {
        batch.item_ids.push_back(items[indices[b * options.per_batch + k]].item_id);
      }
      batches.push_back(std::move(batch));
    }
  }
  return batches;
}

Json to_json(const AnnotationBatch& b) {
  return Json{{"batch_id", b.batch_id},
              {"program", b.program},
              {"item_ids", b.item_ids},
              {"created_at", format_timestamp(b.created_at)}};
}

AnnotationBatch annotation_batch_from_json(const Json& row) {
  AnnotationBatch b;
  b.batch_id = require_string(row, "batch_id");
  b.program = require_string(row, "program");
  b.item_ids = require_field(row, "item_ids").get<std::vector<std::string>>();
  b.created_at = parse_timestamp(require_string(row, "created_at"));
  if (b.item_ids.empty()) throw std::invalid_argument("batch " + b.batch_id + " has no items");
  return b;
}

void save_batches(const std::filesystem::path& path, std::span<const AnnotationBatch> batches) {
  std::vector<Json> rows;
  for (const auto& b : batches) rows.push_back(to_json(b));
  write_jsonl_atomic(path, rows);
}

std::vector<AnnotationBatch> load_batches(const std::filesystem::path& path) {
  std::vector<AnnotationBatch> out;
  for (const auto& row : read_jsonl(path)) out.push_back(annotation_batch_from_json(row));
  return out;
}

// ---------------------------------------------------------------------------
// Annotations

std::string_view to_string(TextVariant v) {
  return v == TextVariant::translation ? "translation" : "original";
}

Json to_json(const Annotation& a) {
  Json row{{"item_id", a.item_id},
           {"annotator_id", a.annotator_id},
           {"main_frame", frame_id(a.main_frame)},
           {"alternative_frame", nullptr},
           {"evidence_sentences", a.evidence_sentences},
           {"comments", nullptr},
           {"evidence_verified", a.evidence_verified},
           {"submitted_at", format_timestamp(a.submitted_at)},
           {"text_shown", to_string(a.text_shown)},
           {"shown_word_count", nullptr}};
  if (a.alternative_frame) row["alternative_frame"] = frame_id(*a.alternative_frame);
  if (a.comments) row["comments"] = *a.comments;
  if (a.shown_word_count) row["shown_word_count"] = *a.shown_word_count;
  return row;
}

Annotation annotation_from_json(const Json& row) {
  try {
    if (!row.is_object()) throw std::invalid_argument("annotation must be a JSON object");
    Annotation a;
    a.item_id = require_string(row, "item_id");
    a.annotator_id = optional_string(row, "annotator_id").value_or("");
    a.main_frame = frame_from_string(require_string(row, "main_frame"));
    if (auto alt = optional_string(row, "alternative_frame"); alt && !alt->empty() && *alt != "none") {
      a.alternative_frame = frame_from_string(*alt);
    }
    if (auto it = row.find("evidence_sentences"); it != row.end() && !it->is_null()) {
      if (!it->is_array()) throw std::invalid_argument("evidence_sentences must be an array");
      for (const auto& s : *it) {
        if (!s.is_string()) throw std::invalid_argument("evidence sentences must be strings");
        a.evidence_sentences.push_back(s.get<std::string>());
      }
    }
    a.comments = optional_string(row, "comments");
    if (auto it = row.find("evidence_verified"); it != row.end() && it->is_boolean()) {
      a.evidence_verified = it->get<bool>();
    }
    if (auto ts = optional_string(row, "submitted_at")) a.submitted_at = parse_timestamp(*ts);
    if (auto shown = optional_string(row, "text_shown")) {
      if (*shown == "translation") a.text_shown = TextVariant::translation;
      else if (*shown == "original") a.text_shown = TextVariant::original;
      else throw std::invalid_argument("text_shown must be 'original' or 'translation'");
    }
    if (auto it = row.find("shown_word_count"); it != row.end() && !it->is_null()) {
      if (!it->is_number_unsigned()) throw std::invalid_argument("shown_word_count must be a count");
      a.shown_word_count = it->get<std::size_t>();
    }
    return a;
  } catch (const std::invalid_argument& e) {
    throw AnnotationError("MalformedAnnotation", e.what());
  }
}

std::string normalize_whitespace(std::string_view text) {
  std::string out;
  bool pending_space = false;
  for (char c : text) {
    if (std::isspace(static_cast<unsigned char>(c))) {
      pending_space = !out.empty();
    } else {
      if (pending_space) out.push_back(' ');
      pending_space = false;
      out.push_back(c);
    }
  }
  return out;
}

bool verify_evidence(std::span<const std::string> sentences, std::string_view text) {
  const auto haystack = normalize_whitespace(text);
  return std::all_of(sentences.begin(), sentences.end(), [&](const std::string& s) {
    return haystack.find(normalize_whitespace(s)) != std::string::npos;
  });
}

ItemCatalog::ItemCatalog(std::vector<TranscriptItem> items, const TranslationCache* translations,
                         std::string target_language)
    : items_(std::move(items)), target_language_(std::move(target_language)) {
  for (std::size_t i = 0; i < items_.size(); ++i) {
    index_.emplace(items_[i].item_id, i);
    if (translations != nullptr) {
      if (auto t = translations->find_any(items_[i].item_id, target_language_)) {
        translated_.emplace(items_[i].item_id, t->translated_text);
      }
    }
  }
}

std::optional<ItemCatalog::View> ItemCatalog::find(std::string_view item_id) const {
  auto it = index_.find(item_id);
  if (it == index_.end()) return std::nullopt;
  const auto& item = items_[it->second];
  if (auto t = translated_.find(item_id); t != translated_.end()) {
    return View{&item, t->second, TextVariant::translation, target_language_};
  }
  return View{&item, item.text, TextVariant::original, item.language};
}

AnnotationStore::AnnotationStore(std::filesystem::path path)
    : snapshot_(std::make_shared<const Snapshot>()), appender_(std::move(path)) {
  std::lock_guard lock(write_mu_);
  for (const auto& row : read_jsonl_if_exists(appender_.path())) {
    auto a = annotation_from_json(row);
    std::pair key{a.item_id, a.annotator_id};
    if (!latest_.count(key)) key_order_.push_back(key);
    latest_[key] = events_.size();
    events_.push_back(std::move(a));
  }
  publish_locked();
}

void AnnotationStore::publish_locked() {
  auto snap = std::make_shared<Snapshot>();
  snap->reserve(key_order_.size());
  for (const auto& key : key_order_) snap->push_back(events_[latest_.at(key)]);
  std::lock_guard lock(snap_mu_);
  snapshot_ = std::move(snap);
}

void AnnotationStore::put(const Annotation& a) {
  std::lock_guard lock(write_mu_);
  appender_.append({to_json(a)});
  std::pair key{a.item_id, a.annotator_id};
  if (!latest_.count(key)) key_order_.push_back(key);
  latest_[key] = events_.size();
  events_.push_back(a);
  publish_locked();
}

std::shared_ptr<const AnnotationStore::Snapshot> AnnotationStore::snapshot() const {
  std::lock_guard lock(snap_mu_);
  return snapshot_;
}

std::vector<Annotation> AnnotationStore::query(std::optional<std::string_view> item_id,
                                               std::optional<std::string_view> annotator_id) const {
  const auto snap = snapshot();
  std::vector<Annotation> out;
  for (const auto& a : *snap) {
    if (item_id && a.item_id != *item_id) continue;
    if (annotator_id && a.annotator_id != *annotator_id) continue;
    out.push_back(a);
  }
  return out;
}

std::size_t AnnotationStore::event_count() const {
  std::lock_guard lock(write_mu_);
  return events_.size();
}

std::vector<Annotation> load_annotations(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) throw IoError("cannot open " + path.string());
  AnnotationStore store(path);
  return *store.snapshot();
}

Annotation record_annotation(Annotation a, const ItemCatalog& catalog, AnnotationStore& store,
                             Clock& clock) {
  const auto view = catalog.find(a.item_id);
  if (!view) throw AnnotationError("UnknownItem", "unknown item '" + a.item_id + "'");
  if (a.alternative_frame && *a.alternative_frame == a.main_frame) {
    throw AnnotationError("AlternativeEqualsMain", "alternative frame must differ from the main frame");
  }
  if (a.annotator_id.empty()) throw AnnotationError("MalformedAnnotation", "annotator_id is empty");
  a.evidence_verified = verify_evidence(a.evidence_sentences, view->text);
  a.text_shown = view->variant;
  a.shown_word_count = word_count(view->text);
  a.submitted_at = clock.wall_now();
  store.put(a);
  return a;
}

std::span<const std::string_view> annotation_questions() {
  static constexpr std::string_view kQuestions[] = {
      "What is the main frame of this text?",
      "Is there an alternative frame? If so, which one?",
      "Copy and paste the sentences that helped you choose the main frame.",
      "Comments (optional): anything you want to explain about this text.",
  };
  return kQuestions;
}

}  // namespace frames
