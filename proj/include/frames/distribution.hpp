#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "frames/frame.hpp"
#include "frames/jsonl.hpp"

namespace frames {

// One candidate first token with its natural-log probability.
struct TokenProb {
  std::string token;
  double logprob = 0.0;

  bool operator==(const TokenProb&) const = default;
};

struct FrameDistribution {
  PerFrame<double> mass{};
  double unmatched_residual = 0.0;
  Frame predominant = Frame::AttributionOfResponsibility;
  bool tie = false;  // predominant was chosen by frame order among equal masses

  double operator[](Frame f) const noexcept { return mass[frame_index(f)]; }
  double frame_total() const noexcept;
  bool operator==(const FrameDistribution&) const = default;
};

class NoUsableTokens : public FramesError {
 public:
  NoUsableTokens() : FramesError("NoUsableTokens", "no alternative token maps to a frame") {}
};

// Strips surrounding whitespace and ASCII punctuation, lowercases ASCII.
std::string normalize_token(std::string_view token);

// Tokens shorter than this after normalization never match. Keeps articles
// like "A" from being read as a prefix of "attribution".
inline constexpr std::size_t kMinMatchLength = 2;

// The frame whose aliases the normalized token is a prefix of, provided no
// other frame's alias also has it as a prefix.
std::optional<Frame> match_token(std::string_view normalized);

// Sums exp(logprob) per matched frame; unmatched and ambiguous tokens go to
// the residual. Summation is order-independent. Throws NoUsableTokens when no
// frame receives mass, std::invalid_argument on an empty list or a logprob
// that is positive or not finite.
FrameDistribution extract_distribution(std::span<const TokenProb> alternatives,
                                       const FrameOrder& order = kDefaultFrameOrder);

// Argmax over `mass`, ties resolved by earliest position in `order`.
std::pair<Frame, bool> predominant_frame(const PerFrame<double>& mass, const FrameOrder& order);

Json to_json(const TokenProb& t);
TokenProb token_prob_from_json(const Json& row);
Json to_json(const FrameDistribution& d);
FrameDistribution frame_distribution_from_json(const Json& row);

}  // namespace frames
