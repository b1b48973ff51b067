#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "frames/clock.hpp"
#include "frames/corpus.hpp"
#include "frames/frame.hpp"
#include "frames/jsonl.hpp"
#include "frames/prompt.hpp"

namespace frames {

class TranslationCache;

inline constexpr std::uint64_t kDefaultSeed = 20230601;

// ---------------------------------------------------------------------------
// Batches

struct AnnotationBatch {
  std::string batch_id;
  std::string program;
  std::vector<std::string> item_ids;
  Timestamp created_at{};

  bool operator==(const AnnotationBatch&) const = default;
};

struct BatchOptions {
  std::size_t per_batch = 50;
  std::size_t n_batches = 20;
  std::uint64_t seed = kDefaultSeed;
};

class InsufficientItems : public FramesError {
 public:
  InsufficientItems(const std::string& program, std::size_t needed, std::size_t available)
      : FramesError("InsufficientItems", "program '" + program + "' needs " +
                                             std::to_string(needed) + " items, has " +
                                             std::to_string(available)),
        program_(program), needed_(needed), available_(available) {}

  const std::string& program() const noexcept { return program_; }
  std::size_t needed() const noexcept { return needed_; }
  std::size_t available() const noexcept { return available_; }

 private:
  std::string program_;
  std::size_t needed_;
  std::size_t available_;
};

// For each program (in order of first appearance): shuffle its items with a
// seeded generator, then cut the first per_batch * n_batches into batches
// named "<program>-<NN>".
std::vector<AnnotationBatch> generate_batches(std::span<const TranscriptItem> items,
                                              const BatchOptions& options, Timestamp created_at);

// Seeded Fisher-Yates over mt19937_64 with an unbiased bounded draw, so the
// permutation is identical across standard library implementations.
void seeded_shuffle(std::vector<std::size_t>& values, std::uint64_t seed);

Json to_json(const AnnotationBatch& b);
AnnotationBatch annotation_batch_from_json(const Json& row);
void save_batches(const std::filesystem::path& path, std::span<const AnnotationBatch> batches);
std::vector<AnnotationBatch> load_batches(const std::filesystem::path& path);

// ---------------------------------------------------------------------------
// Annotations

enum class TextVariant { original, translation };

std::string_view to_string(TextVariant v);

struct Annotation {
  std::string item_id;
  std::string annotator_id;
  Frame main_frame = Frame::AttributionOfResponsibility;
  std::optional<Frame> alternative_frame;
  std::vector<std::string> evidence_sentences;
  std::optional<std::string> comments;
  bool evidence_verified = false;
  Timestamp submitted_at{};
  TextVariant text_shown = TextVariant::original;
  std::optional<std::size_t> shown_word_count;

  bool operator==(const Annotation&) const = default;
};

class AnnotationError : public FramesError {
 public:
  using FramesError::FramesError;
};

Json to_json(const Annotation& a);
// Throws UnknownFrameLabel for bad frame strings and AnnotationError
// ("MalformedAnnotation") for missing or mistyped fields.
Annotation annotation_from_json(const Json& row);

// Collapses whitespace runs to one space and trims.
std::string normalize_whitespace(std::string_view text);

// True iff every sentence, whitespace-normalized, occurs in the normalized text.
bool verify_evidence(std::span<const std::string> sentences, std::string_view text);

// Resolves which text an annotator sees for an item: the translation when
// one exists, the original otherwise.
class ItemCatalog {
 public:
  struct View {
    const TranscriptItem* item = nullptr;
    std::string_view text;
    TextVariant variant = TextVariant::original;
    std::string language;
  };

  ItemCatalog(std::vector<TranscriptItem> items, const TranslationCache* translations = nullptr,
              std::string target_language = "en");

  std::optional<View> find(std::string_view item_id) const;
  const std::vector<TranscriptItem>& items() const noexcept { return items_; }

 private:
  std::vector<TranscriptItem> items_;
  std::map<std::string, std::size_t, std::less<>> index_;
  std::map<std::string, std::string, std::less<>> translated_;
  std::string target_language_;
};

// annotations.jsonl: append-only events; the latest per (item, annotator)
// is current and earlier ones form the audit trail.
class AnnotationStore {
 public:
  using Snapshot = std::vector<Annotation>;  // current annotations, first-submission order

  explicit AnnotationStore(std::filesystem::path path);

  // Appends and publishes a new snapshot. Serialized across threads.
  void put(const Annotation& a);

  std::shared_ptr<const Snapshot> snapshot() const;
  std::vector<Annotation> query(std::optional<std::string_view> item_id,
                                std::optional<std::string_view> annotator_id) const;
  std::size_t event_count() const;
  const std::filesystem::path& path() const noexcept { return appender_.path(); }

 private:
  void publish_locked();

  mutable std::mutex write_mu_;
  mutable std::mutex snap_mu_;
  std::vector<Annotation> events_;
  std::map<std::pair<std::string, std::string>, std::size_t> latest_;  // key -> events_ index
  std::vector<std::pair<std::string, std::string>> key_order_;
  std::shared_ptr<const Snapshot> snapshot_;
  JsonlAppender appender_;
};

// Latest annotation per (item, annotator) from an annotations.jsonl file.
std::vector<Annotation> load_annotations(const std::filesystem::path& path);

// Validates and stores. Fills evidence_verified, submitted_at, text_shown and
// shown_word_count. Throws AnnotationError with code UnknownItem or
// AlternativeEqualsMain.
Annotation record_annotation(Annotation a, const ItemCatalog& catalog, AnnotationStore& store,
                             Clock& clock);

// The four form questions shown under the definitions.
std::span<const std::string_view> annotation_questions();

}  // namespace frames
