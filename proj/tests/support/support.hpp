#pragma once

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "frames/analysis.hpp"
#include "frames/cli.hpp"
#include "frames/csv.hpp"
#include "frames/frame.hpp"
#include "frames/http.hpp"

namespace frames::testing {

namespace fs = std::filesystem;

// Scratch directory removed on destruction.
class TempDir {
 public:
  TempDir() {
    std::string tmpl = (fs::temp_directory_path() / "frames-test-XXXXXX").string();
    if (mkdtemp(tmpl.data()) == nullptr) throw std::runtime_error("mkdtemp failed");
    path_ = tmpl;
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const fs::path& path() const { return path_; }
  fs::path operator/(const std::string& name) const { return path_ / name; }

 private:
  fs::path path_;
};

inline std::string read_text(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_text(const fs::path& p, const std::string& content) {
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  std::ofstream out(p, std::ios::binary);
  out << content;
}

inline fs::path fixture(const std::string& name) { return fs::path(FRAMES_TEST_FIXTURES) / name; }

struct CliRun {
  int code;
  std::string out;
  std::string err;
};

inline CliRun run_cli(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  const int code = cli::run_command(args, out, err);
  return {code, out.str(), err.str()};
}

// Disallows real outbound connections for the lifetime of the guard.
class NetworkForbidden {
 public:
  NetworkForbidden() : before_(net::outbound_attempts()) { net::set_forbidden(true); }
  ~NetworkForbidden() { net::set_forbidden(false); }
  std::size_t attempts() const { return net::outbound_attempts() - before_; }

 private:
  std::size_t before_;
};

struct Cell {
  Frame human;
  Frame machine;
  std::size_t count;
};

// human,machine,count,source cell table.
inline std::vector<Cell> load_cells(const std::string& name) {
  std::ifstream in(fixture(name));
  std::vector<Cell> cells;
  for (const auto& rec : csv::read(in)) {
    if (rec.line_number == 1) continue;
    cells.push_back({frame_from_string(rec.fields.at(0)), frame_from_string(rec.fields.at(1)),
                     static_cast<std::size_t>(std::stoul(rec.fields.at(2)))});
  }
  return cells;
}

// A distribution whose full mass sits on `f`.
inline FrameDistribution point_mass(Frame f) {
  FrameDistribution d;
  d.mass[frame_index(f)] = 1.0;
  d.predominant = f;
  return d;
}

inline std::vector<JoinedPair> expand_cells(const std::vector<Cell>& cells) {
  std::vector<JoinedPair> pairs;
  for (const auto& c : cells) {
    for (std::size_t i = 0; i < c.count; ++i) {
      JoinedPair p;
      p.item_id = "i" + std::to_string(pairs.size());
      p.annotator_id = "a";
      p.model_id = "m";
      p.human = c.human;
      p.machine = point_mass(c.machine);
      pairs.push_back(std::move(p));
    }
  }
  return pairs;
}

// Words that appear in no default lexicon set.
inline const std::vector<std::string>& filler_words() {
  static const std::vector<std::string> words = {"the", "report", "said", "today", "evening",
                                                 "and", "new", "city", "was", "about"};
  return words;
}

// One default-lexicon keyword per frame, by enum index.
inline const PerFrame<std::string>& probe_keywords() {
  static const PerFrame<std::string> words = {"blame", "family", "war", "moral", "budget"};
  return words;
}

// Synthetic corpus whose per-frame keyword counts are known up front.
struct SyntheticItem {
  std::string item_id;
  std::string program;
  std::string text;
  PerFrame<std::size_t> hits{};
  Frame human = Frame::AttributionOfResponsibility;
};

// Hit counts are drawn so that the maximum is unique; the human label agrees
// with it roughly half the time.
inline std::vector<SyntheticItem> synthetic_corpus(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<SyntheticItem> items;
  for (std::size_t i = 0; i < n; ++i) {
    SyntheticItem it;
    it.item_id = "s" + std::to_string(1000 + i);
    it.program = (i % 2 == 0) ? "Alpha" : "Beta";
    std::vector<std::string> words;
    for (;;) {
      for (auto& h : it.hits) h = rng() % 4;
      const auto top = *std::max_element(it.hits.begin(), it.hits.end());
      if (top > 0 && std::count(it.hits.begin(), it.hits.end(), top) == 1) break;
    }
    for (std::size_t f = 0; f < kFrameCount; ++f) {
      for (std::size_t k = 0; k < it.hits[f]; ++k) words.push_back(probe_keywords()[f]);
    }
    const std::size_t fill = 20 + rng() % 400;
    for (std::size_t k = 0; k < fill; ++k) words.push_back(filler_words()[rng() % filler_words().size()]);
    std::shuffle(words.begin(), words.end(), rng);
    for (const auto& w : words) it.text += (it.text.empty() ? "" : " ") + w;
    const auto top_index = static_cast<std::size_t>(
        std::max_element(it.hits.begin(), it.hits.end()) - it.hits.begin());
    it.human = (rng() % 2 == 0) ? kAllFrames[top_index] : kAllFrames[rng() % kFrameCount];
    items.push_back(std::move(it));
  }
  return items;
}

}  // namespace frames::testing
