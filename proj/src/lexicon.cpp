#include "frames/lexicon.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

#include "frames/default_lexicon.hpp"

namespace frames {

void FrameLexicon::validate() const {
  std::map<std::string, Frame> owner;
  for (Frame f : kAllFrames) {
    const auto& words = keywords[frame_index(f)];
    if (words.empty()) {
      throw std::invalid_argument("lexicon has no keywords for " + std::string(frame_label(f)));
    }
    for (const auto& w : words) {
      if (w.empty()) throw std::invalid_argument("empty keyword");
      for (unsigned char c : w) {
        if (std::isupper(c) || std::isspace(c)) {
          throw std::invalid_argument("keyword '" + w + "' must be a lowercase single word");
        }
      }
      auto [it, inserted] = owner.emplace(w, f);
      if (!inserted && it->second != f) {
        throw std::invalid_argument("keyword '" + w + "' is listed under two frames");
      }
    }
  }
}

FrameLexicon FrameLexicon::from_jsonl(std::istream& in) {
  FrameLexicon lex;
  for (const auto& line : read_lines(in)) {
    const auto row = Json::parse(line.text);
    const Frame f = frame_from_string(require_string(row, "frame"));
    const auto& words = require_field(row, "keywords");
    if (!words.is_array()) throw std::invalid_argument("keywords must be an array");
    for (const auto& w : words) lex.keywords[frame_index(f)].push_back(w.get<std::string>());
  }
  for (auto& words : lex.keywords) {
    std::sort(words.begin(), words.end());
    words.erase(std::unique(words.begin(), words.end()), words.end());
  }
  lex.validate();
  return lex;
}

FrameLexicon FrameLexicon::defaults() {
  std::istringstream in(detail::kDefaultLexiconJsonl);
  return from_jsonl(in);
}

FrameLexicon FrameLexicon::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  return from_jsonl(in);
}

PerFrame<std::size_t> lexicon_hits(std::string_view text, const FrameLexicon& lexicon) {
  std::map<std::string, Frame, std::less<>> owner;
  for (Frame f : kAllFrames) {
    for (const auto& w : lexicon.keywords[frame_index(f)]) owner.emplace(w, f);
  }
  PerFrame<std::size_t> hits{};
  auto is_word = [](unsigned char c) { return std::isalnum(c) || c >= 0x80; };
  std::string word;
  auto flush = [&] {
    if (word.empty()) return;
    if (auto it = owner.find(word); it != owner.end()) ++hits[frame_index(it->second)];
    word.clear();
  };
  for (unsigned char c : text) {
    if (is_word(c)) {
      word.push_back(static_cast<char>(std::tolower(c)));
    } else {
      flush();
    }
  }
  flush();
  return hits;
}

std::vector<TokenProb> lexicon_complete(std::string_view text, const FrameLexicon& lexicon,
                                        const FrameOrder& order) {
  const auto hits = lexicon_hits(text, lexicon);
  std::size_t total = 0;
  for (auto h : hits) total += h;
  if (total == 0) return {{"None", 0.0}};

  std::vector<TokenProb> out;
  for (Frame f : order) {
    const auto h = hits[frame_index(f)];
    if (h == 0) continue;
    const auto label = frame_label(f);
    out.push_back({std::string(label.substr(0, label.find(' '))),
                   std::log(static_cast<double>(h) / static_cast<double>(total))});
  }
  return out;
}

}  // namespace frames
