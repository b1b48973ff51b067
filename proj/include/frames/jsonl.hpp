#pragma once

#include <filesystem>
#include <fstream>
#include <functional>
#include <mutex>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace frames {

using Json = nlohmann::json;

struct JsonlLine {
  std::size_t line_number;  // 1-based
  std::string text;
};

// Non-blank lines of a JSONL stream with their line numbers.
std::vector<JsonlLine> read_lines(std::istream& in);

// Parses every non-blank line; throws IoError naming the first bad line.
std::vector<Json> read_jsonl(const std::filesystem::path& path);
// Same, but a missing file reads as empty.
std::vector<Json> read_jsonl_if_exists(const std::filesystem::path& path);

// Compact, key-sorted serialization; the canonical byte form of every store.
std::string to_line(const Json& value);

// Writes `content` to a temporary sibling and renames it over `path`.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);
void write_jsonl_atomic(const std::filesystem::path& path, const std::vector<Json>& rows);

// Single-writer append-only JSONL file. Appends are serialized internally.
class JsonlAppender {
 public:
  explicit JsonlAppender(std::filesystem::path path);

  void append(const std::vector<Json>& rows);
  const std::filesystem::path& path() const noexcept { return path_; }

 private:
  std::filesystem::path path_;
  std::mutex mu_;
};

// Helpers for pulling typed fields out of a row with a readable error.
const Json& require_field(const Json& row, std::string_view key);
std::string require_string(const Json& row, std::string_view key);
std::optional<std::string> optional_string(const Json& row, std::string_view key);

}  // namespace frames
