#pragma once

#include <istream>
#include <string>
#include <string_view>
#include <vector>

namespace frames::csv {

struct Record {
  std::size_t line_number;  // line on which the record starts, 1-based
  std::vector<std::string> fields;
};

class ParseError : public std::runtime_error {
 public:
  ParseError(std::size_t line, const std::string& message)
      : std::runtime_error(message), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

// RFC 4180 reader: quoted fields may contain commas, doubled quotes and
// newlines. CRLF and LF line endings are both accepted.
std::vector<Record> read(std::istream& in);

// Quotes a field only when it needs it.
std::string escape(std::string_view field);
std::string join_row(const std::vector<std::string>& fields);

}  // namespace frames::csv
