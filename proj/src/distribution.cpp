#include "frames/distribution.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace frames {
namespace {

// Sorting before summing makes the result independent of input order.
double ordered_sum(std::vector<double>& values) {
  std::sort(values.begin(), values.end());
  double total = 0.0;
  for (double v : values) total += v;
  return total;
}

}  // namespace

double FrameDistribution::frame_total() const noexcept {
  double total = 0.0;
  for (double m : mass) total += m;
  return total;
}

std::string normalize_token(std::string_view token) {
  auto strip = [](unsigned char c) { return std::isspace(c) || std::ispunct(c); };
  while (!token.empty() && strip(static_cast<unsigned char>(token.front()))) token.remove_prefix(1);
  while (!token.empty() && strip(static_cast<unsigned char>(token.back()))) token.remove_suffix(1);
  std::string out(token);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

std::optional<Frame> match_token(std::string_view normalized) {
  if (normalized.size() < kMinMatchLength) return std::nullopt;
  std::optional<Frame> match;
  for (Frame f : kAllFrames) {
    const auto aliases = frame_aliases(f);
    const bool hit = std::any_of(aliases.begin(), aliases.end(),
                                 [&](std::string_view alias) { return alias.starts_with(normalized); });
    if (!hit) continue;
    if (match) return std::nullopt;  // prefix of two frames' aliases
    match = f;
  }
  return match;
}

std::pair<Frame, bool> predominant_frame(const PerFrame<double>& mass, const FrameOrder& order) {
  Frame best = order.front();
  for (Frame f : order) {
    if (mass[frame_index(f)] > mass[frame_index(best)]) best = f;
  }
  const double top = mass[frame_index(best)];
  const auto equal = std::count_if(order.begin(), order.end(),
                                   [&](Frame f) { return mass[frame_index(f)] == top; });
  return {best, equal > 1};
}

FrameDistribution extract_distribution(std::span<const TokenProb> alternatives,
                                       const FrameOrder& order) {
  validate_frame_order(order);
  if (alternatives.empty()) throw std::invalid_argument("no alternatives to extract from");

  PerFrame<std::vector<double>> per_frame;
  std::vector<double> residual;
  for (const auto& alt : alternatives) {
    if (!std::isfinite(alt.logprob) || alt.logprob > 0.0) {
      throw std::invalid_argument("logprob for token '" + alt.token + "' must be finite and <= 0");
    }
    const double p = std::exp(alt.logprob);
    if (auto f = match_token(normalize_token(alt.token))) {
      per_frame[frame_index(*f)].push_back(p);
    } else {
      residual.push_back(p);
    }
  }

  FrameDistribution d;
  bool any = false;
  for (Frame f : kAllFrames) {
    d.mass[frame_index(f)] = ordered_sum(per_frame[frame_index(f)]);
    any = any || d.mass[frame_index(f)] > 0.0;
  }
  if (!any) throw NoUsableTokens();
  d.unmatched_residual = ordered_sum(residual);
  std::tie(d.predominant, d.tie) = predominant_frame(d.mass, order);
  return d;
}

Json to_json(const TokenProb& t) { return Json{{"token", t.token}, {"logprob", t.logprob}}; }

TokenProb token_prob_from_json(const Json& row) {
  const auto& lp = require_field(row, "logprob");
  if (!lp.is_number()) throw std::invalid_argument("logprob must be a number");
  return {require_string(row, "token"), lp.get<double>()};
}

Json to_json(const FrameDistribution& d) {
  Json mass = Json::object();
  for (Frame f : kAllFrames) mass[std::string(frame_id(f))] = d[f];
  return Json{{"mass", mass},
              {"unmatched_residual", d.unmatched_residual},
              {"predominant", frame_id(d.predominant)},
              {"tie", d.tie}};
}

FrameDistribution frame_distribution_from_json(const Json& row) {
  FrameDistribution d;
  const auto& mass = require_field(row, "mass");
  for (Frame f : kAllFrames) d.mass[frame_index(f)] = require_field(mass, frame_id(f)).get<double>();
  d.unmatched_residual = require_field(row, "unmatched_residual").get<double>();
  d.predominant = frame_from_string(require_string(row, "predominant"));
  d.tie = require_field(row, "tie").get<bool>();
  return d;
}

}  // namespace frames
