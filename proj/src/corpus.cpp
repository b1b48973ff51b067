#include "frames/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "frames/csv.hpp"

namespace frames {
namespace {

bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }

std::chrono::year_month_day parse_date(const std::string& s) {
  int y = 0;
  unsigned m = 0, d = 0;
  char tail = 0;
  if (s.size() != 10 || std::sscanf(s.c_str(), "%4d-%2u-%2u%c", &y, &m, &d, &tail) != 3 ||
      s[4] != '-' || s[7] != '-') {
    throw std::invalid_argument("air_date '" + s + "' is not YYYY-MM-DD");
  }
  std::chrono::year_month_day ymd{std::chrono::year{y}, std::chrono::month{m}, std::chrono::day{d}};
  if (!ymd.ok()) throw std::invalid_argument("air_date '" + s + "' is not a calendar date");
  return ymd;
}

std::string format_date(const std::chrono::year_month_day& ymd) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()));
  return buf;
}

TranscriptItem make_item(std::string id, std::string program, const std::optional<std::string>& date,
                         std::optional<std::string> language, std::string text) {
  if (id.empty()) throw std::invalid_argument("item_id is empty");
  TranscriptItem item;
  item.item_id = std::move(id);
  item.program = std::move(program);
  if (date && !date->empty()) item.air_date = parse_date(*date);
  if (language && !language->empty()) item.language = std::move(*language);
  item.word_count = word_count(text);
  item.text = std::move(text);
  return item;
}

class Collector {
 public:
  void add(TranscriptItem item, std::size_t line) {
    if (!seen_.insert(item.item_id).second) throw DuplicateId(item.item_id, line);
    result_.items.push_back(std::move(item));
  }
  void malformed(std::size_t line, std::string reason) {
    result_.malformed.push_back({line, std::move(reason)});
  }
  IngestResult finish() {
    if (result_.items.empty()) {
      throw EmptyCorpus(std::to_string(result_.malformed.size()) + " malformed row(s)");
    }
    return std::move(result_);
  }

 private:
  std::set<std::string> seen_;
  IngestResult result_;
};

IngestResult parse_jsonl(std::istream& in) {
  Collector c;
  for (auto& line : read_lines(in)) {
    TranscriptItem item;
    try {
      item = transcript_item_from_json(Json::parse(line.text));
    } catch (const Json::exception& e) {
      c.malformed(line.line_number, std::string("invalid JSON: ") + e.what());
      continue;
    } catch (const std::invalid_argument& e) {
      c.malformed(line.line_number, e.what());
      continue;
    }
    c.add(std::move(item), line.line_number);
  }
  return c.finish();
}

IngestResult parse_csv(std::istream& in) {
  Collector c;
  std::vector<csv::Record> records;
  try {
    records = csv::read(in);
  } catch (const csv::ParseError& e) {
    // An unterminated quote swallows the rest of the file; nothing after it is usable.
    c.malformed(e.line(), e.what());
    return c.finish();
  }
  if (records.empty()) return c.finish();

  std::map<std::string, std::size_t> col;
  for (std::size_t i = 0; i < records[0].fields.size(); ++i) col[records[0].fields[i]] = i;
  for (const char* required : {"item_id", "program", "text"}) {
    if (!col.count(required)) {
      throw EmptyCorpus(std::string("CSV header lacks column '") + required + "'");
    }
  }
  const std::size_t width = records[0].fields.size();
  auto field = [&](const csv::Record& r, const char* name) -> std::optional<std::string> {
    auto it = col.find(name);
    if (it == col.end()) return std::nullopt;
    return r.fields[it->second];
  };

  for (std::size_t r = 1; r < records.size(); ++r) {
    const auto& rec = records[r];
    if (rec.fields.size() != width) {
      c.malformed(rec.line_number, "expected " + std::to_string(width) + " fields, got " +
                                       std::to_string(rec.fields.size()));
      continue;
    }
    TranscriptItem item;
    try {
      item = make_item(*field(rec, "item_id"), *field(rec, "program"), field(rec, "air_date"),
                       field(rec, "language"), *field(rec, "text"));
    } catch (const std::invalid_argument& e) {
      c.malformed(rec.line_number, e.what());
      continue;
    }
    c.add(std::move(item), rec.line_number);
  }
  return c.finish();
}

}  // namespace

std::size_t word_count(std::string_view text) noexcept {
  std::size_t n = 0;
  bool in_word = false;
  for (char ch : text) {
    const bool space = is_space(ch);
    if (!space && !in_word) ++n;
    in_word = !space;
  }
  return n;
}

CorpusFormat parse_corpus_format(std::string_view name) {
  if (name == "jsonl") return CorpusFormat::jsonl;
  if (name == "csv") return CorpusFormat::csv;
  throw std::invalid_argument("unknown corpus format '" + std::string(name) + "' (jsonl|csv)");
}

IngestResult parse_corpus(std::istream& in, CorpusFormat format) {
  return format == CorpusFormat::jsonl ? parse_jsonl(in) : parse_csv(in);
}

IngestResult ingest_corpus(const std::filesystem::path& path, CorpusFormat format) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  return parse_corpus(in, format);
}

Json to_json(const TranscriptItem& item) {
  Json row{{"item_id", item.item_id},
           {"program", item.program},
           {"language", item.language},
           {"text", item.text},
           {"word_count", item.word_count}};
  if (item.air_date) row["air_date"] = format_date(*item.air_date);
  return row;
}

TranscriptItem transcript_item_from_json(const Json& row) {
  if (!row.is_object()) throw std::invalid_argument("row is not a JSON object");
  auto item = make_item(require_string(row, "item_id"), require_string(row, "program"),
                        optional_string(row, "air_date"), optional_string(row, "language"),
                        require_string(row, "text"));
  if (auto it = row.find("word_count"); it != row.end()) {
    if (!it->is_number_unsigned() || it->get<std::size_t>() != item.word_count) {
      throw std::invalid_argument("word_count does not match text");
    }
  }
  return item;
}

void save_corpus(const std::filesystem::path& path, std::span<const TranscriptItem> items) {
  std::vector<Json> rows;
  rows.reserve(items.size());
  for (const auto& item : items) rows.push_back(to_json(item));
  write_jsonl_atomic(path, rows);
}

std::vector<TranscriptItem> load_corpus(const std::filesystem::path& path) {
  auto result = ingest_corpus(path, CorpusFormat::jsonl);
  if (!result.malformed.empty()) {
    const auto& first = result.malformed.front();
    throw IoError(path.string() + ":" + std::to_string(first.line) + ": " + first.reason);
  }
  return std::move(result.items);
}

std::vector<ProgramStats> corpus_stats(std::span<const TranscriptItem> items) {
  std::map<std::string, ProgramStats> by_program;
  std::map<std::string, double> sums;
  for (const auto& item : items) {
    auto [it, inserted] = by_program.try_emplace(item.program);
    auto& s = it->second;
    if (inserted) {
      s.program = item.program;
      s.min_words = s.max_words = item.word_count;
    }
    ++s.count;
    s.min_words = std::min(s.min_words, item.word_count);
    s.max_words = std::max(s.max_words, item.word_count);
    sums[item.program] += static_cast<double>(item.word_count);
  }
  std::vector<ProgramStats> out;
  for (auto& [program, s] : by_program) {
    s.mean_words = sums[program] / static_cast<double>(s.count);
    out.push_back(std::move(s));
  }
  return out;
}

}  // namespace frames
