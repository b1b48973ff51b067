#include "frames/jsonl.hpp"

#include <sstream>

#include "frames/error.hpp"

namespace frames {

std::vector<JsonlLine> read_lines(std::istream& in) {
  std::vector<JsonlLine> out;
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    out.push_back({n, std::move(line)});
  }
  return out;
}

std::vector<Json> read_jsonl(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::vector<Json> rows;
  for (auto& line : read_lines(in)) {
    try {
      rows.push_back(Json::parse(line.text));
    } catch (const Json::parse_error& e) {
      throw IoError(path.string() + ":" + std::to_string(line.line_number) + ": " + e.what());
    }
  }
  return rows;
}

std::vector<Json> read_jsonl_if_exists(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) return {};
  return read_jsonl(path);
}

std::string to_line(const Json& value) {
  return value.dump(-1, ' ', false, Json::error_handler_t::replace);
}

void write_file_atomic(const std::filesystem::path& path, std::string_view content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + tmp.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out) throw IoError("write failed for " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw IoError("cannot replace " + path.string() + ": " + ec.message());
}

void write_jsonl_atomic(const std::filesystem::path& path, const std::vector<Json>& rows) {
  std::string content;
  for (const auto& row : rows) {
    content += to_line(row);
    content += '\n';
  }
  write_file_atomic(path, content);
}

JsonlAppender::JsonlAppender(std::filesystem::path path) : path_(std::move(path)) {}

void JsonlAppender::append(const std::vector<Json>& rows) {
  if (rows.empty()) return;
  std::lock_guard lock(mu_);
  if (path_.has_parent_path()) std::filesystem::create_directories(path_.parent_path());
  std::ofstream out(path_, std::ios::binary | std::ios::app);
  if (!out) throw IoError("cannot append to " + path_.string());
  for (const auto& row : rows) out << to_line(row) << '\n';
  out.flush();
  if (!out) throw IoError("append failed for " + path_.string());
}

const Json& require_field(const Json& row, std::string_view key) {
  if (!row.is_object()) throw std::invalid_argument("row is not a JSON object");
  auto it = row.find(key);
  if (it == row.end()) throw std::invalid_argument("missing field '" + std::string(key) + "'");
  return *it;
}

std::string require_string(const Json& row, std::string_view key) {
  const auto& v = require_field(row, key);
  if (!v.is_string()) throw std::invalid_argument("field '" + std::string(key) + "' must be a string");
  return v.get<std::string>();
}

std::optional<std::string> optional_string(const Json& row, std::string_view key) {
  auto it = row.find(key);
  if (it == row.end() || it->is_null()) return std::nullopt;
  if (!it->is_string()) throw std::invalid_argument("field '" + std::string(key) + "' must be a string");
  return it->get<std::string>();
}

}  // namespace frames
