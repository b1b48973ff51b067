#include "frames/csv.hpp"

namespace frames::csv {

std::vector<Record> read(std::istream& in) {
  std::vector<Record> records;
  std::string content((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());

  std::size_t line = 1;
  std::size_t i = 0;
  const std::size_t n = content.size();
  while (i < n) {
    Record rec{line, {}};
    std::string field;
    bool in_quotes = false;
    bool field_was_quoted = false;
    bool end_of_record = false;
    while (i < n && !end_of_record) {
      const char c = content[i];
      if (in_quotes) {
        if (c == '"') {
          if (i + 1 < n && content[i + 1] == '"') {
            field.push_back('"');
            i += 2;
          } else {
            in_quotes = false;
            ++i;
          }
        } else {
          if (c == '\n') ++line;
          field.push_back(c);
          ++i;
        }
        continue;
      }
      switch (c) {
        case '"':
          if (!field.empty() || field_was_quoted) {
            throw ParseError(line, "unexpected quote inside unquoted field");
          }
          in_quotes = true;
          field_was_quoted = true;
          ++i;
          break;
        case ',':
          rec.fields.push_back(std::move(field));
          field.clear();
          field_was_quoted = false;
          ++i;
          break;
        case '\r':
          ++i;
          break;
        case '\n':
          ++line;
          ++i;
          end_of_record = true;
          break;
        default:
          if (field_was_quoted) throw ParseError(line, "characters after closing quote");
          field.push_back(c);
          ++i;
      }
    }
    if (in_quotes) throw ParseError(rec.line_number, "unterminated quoted field");
    rec.fields.push_back(std::move(field));
    const bool blank = rec.fields.size() == 1 && rec.fields[0].empty() && !field_was_quoted;
    if (!blank) records.push_back(std::move(rec));
  }
  return records;
}

std::string escape(std::string_view field) {
  if (field.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(field);
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

std::string join_row(const std::vector<std::string>& fields) {
  std::string out;
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) out.push_back(',');
    out += escape(fields[i]);
  }
  return out;
}

}  // namespace frames::csv
