#pragma once

#include <chrono>
#include <cstddef>
#include <filesystem>
#include <istream>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "frames/error.hpp"
#include "frames/jsonl.hpp"

namespace frames {

struct TranscriptItem {
  std::string item_id;
  std::string program;
  std::optional<std::chrono::year_month_day> air_date;
  std::string language = "und";
  std::string text;
  std::size_t word_count = 0;

  bool operator==(const TranscriptItem&) const = default;
};

// Number of maximal runs of non-whitespace characters.
std::size_t word_count(std::string_view text) noexcept;

enum class CorpusFormat { jsonl, csv };

CorpusFormat parse_corpus_format(std::string_view name);

struct MalformedRow {
  std::size_t line;
  std::string reason;
};

struct IngestResult {
  std::vector<TranscriptItem> items;
  std::vector<MalformedRow> malformed;
};

class DuplicateId : public FramesError {
 public:
  DuplicateId(const std::string& id, std::size_t line)
      : FramesError("DuplicateId",
                    "duplicate item_id '" + id + "' on line " + std::to_string(line)) {}
};

class EmptyCorpus : public FramesError {
 public:
  explicit EmptyCorpus(const std::string& detail)
      : FramesError("EmptyCorpus", "no valid rows: " + detail) {}
};

// Malformed rows are collected, not fatal. DuplicateId aborts; zero valid
// rows raises EmptyCorpus.
IngestResult ingest_corpus(const std::filesystem::path& path, CorpusFormat format);
IngestResult parse_corpus(std::istream& in, CorpusFormat format);

// corpus.jsonl store (input schema plus word_count).
void save_corpus(const std::filesystem::path& path, std::span<const TranscriptItem> items);
// Strict reader for a previously saved store: any malformed row throws.
std::vector<TranscriptItem> load_corpus(const std::filesystem::path& path);

Json to_json(const TranscriptItem& item);
// Throws std::invalid_argument with a human-readable reason.
TranscriptItem transcript_item_from_json(const Json& row);

struct ProgramStats {
  std::string program;
  std::size_t count = 0;
  double mean_words = 0.0;
  std::size_t min_words = 0;
  std::size_t max_words = 0;
};

// One row per program, sorted by program name.
std::vector<ProgramStats> corpus_stats(std::span<const TranscriptItem> items);

}  // namespace frames
