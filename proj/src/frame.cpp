#include "frames/frame.hpp"

#include <algorithm>
#include <cctype>
#include <stdexcept>

namespace frames {
namespace {

struct FrameInfo {
  std::string_view id;
  std::string_view label;
  std::span<const std::string_view> aliases;
};

constexpr std::string_view kResponsibilityAliases[] = {"attribution", "responsibility",
                                                       "attribution of responsibility"};
constexpr std::string_view kHumanInterestAliases[] = {"human", "human interest"};
constexpr std::string_view kConflictAliases[] = {"conflict"};
constexpr std::string_view kMoralityAliases[] = {"morality", "moral"};
constexpr std::string_view kEconomicAliases[] = {"economic", "economics", "economy"};

constexpr std::array<FrameInfo, kFrameCount> kInfo = {{
    {"AttributionOfResponsibility", "Attribution of responsibility", kResponsibilityAliases},
    {"HumanInterest", "Human interest", kHumanInterestAliases},
    {"Conflict", "Conflict", kConflictAliases},
    {"Morality", "Morality", kMoralityAliases},
    {"Economic", "Economic", kEconomicAliases},
}};

bool iequals(std::string_view a, std::string_view b) {
  return a.size() == b.size() && std::equal(a.begin(), a.end(), b.begin(), [](char x, char y) {
           return std::tolower(static_cast<unsigned char>(x)) ==
                  std::tolower(static_cast<unsigned char>(y));
         });
}

}  // namespace

std::string_view frame_id(Frame f) noexcept { return kInfo[frame_index(f)].id; }
std::string_view frame_label(Frame f) noexcept { return kInfo[frame_index(f)].label; }
std::span<const std::string_view> frame_aliases(Frame f) noexcept {
  return kInfo[frame_index(f)].aliases;
}

std::optional<Frame> parse_frame(std::string_view text) {
  while (!text.empty() && std::isspace(static_cast<unsigned char>(text.front()))) text.remove_prefix(1);
  while (!text.empty() && std::isspace(static_cast<unsigned char>(text.back()))) text.remove_suffix(1);
  for (Frame f : kAllFrames) {
    const auto& info = kInfo[frame_index(f)];
    if (iequals(text, info.id) || iequals(text, info.label)) return f;
    for (auto alias : info.aliases) {
      if (iequals(text, alias)) return f;
    }
  }
  return std::nullopt;
}

Frame frame_from_string(std::string_view text) {
  if (auto f = parse_frame(text)) return *f;
  throw UnknownFrameLabel(text);
}

void validate_frame_order(const FrameOrder& order) {
  PerFrame<bool> seen{};
  for (Frame f : order) {
    const auto i = frame_index(f);
    if (i >= kFrameCount || seen[i]) {
      throw std::invalid_argument("frame order must list each of the five frames exactly once");
    }
    seen[i] = true;
  }
}

std::size_t position_in(const FrameOrder& order, Frame f) {
  return static_cast<std::size_t>(std::find(order.begin(), order.end(), f) - order.begin());
}

}  // namespace frames
