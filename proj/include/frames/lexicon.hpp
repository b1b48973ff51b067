#pragma once

#include <cstddef>
#include <filesystem>
#include <istream>
#include <string>
#include <string_view>
#include <vector>

#include "frames/distribution.hpp"
#include "frames/frame.hpp"

namespace frames {

// Keyword sets per frame. Lowercase single words, pairwise disjoint.
struct FrameLexicon {
  PerFrame<std::vector<std::string>> keywords;

  // Throws std::invalid_argument on empty sets, overlap, or non-lowercase keywords.
  void validate() const;

  static FrameLexicon defaults();
  static FrameLexicon from_jsonl(std::istream& in);
  static FrameLexicon load(const std::filesystem::path& path);
};

// Keyword hits per frame; words are maximal runs of ASCII alphanumerics (or
// non-ASCII bytes), compared lowercased.
PerFrame<std::size_t> lexicon_hits(std::string_view text, const FrameLexicon& lexicon);

// One token per frame with hits, in `order`: the first word of the frame's
// display label with logprob ln(hits / total). No hits yields {"None", 0}.
std::vector<TokenProb> lexicon_complete(std::string_view text, const FrameLexicon& lexicon,
                                        const FrameOrder& order = kDefaultFrameOrder);

}  // namespace frames
