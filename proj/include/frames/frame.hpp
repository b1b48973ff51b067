#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>

#include "frames/error.hpp"

namespace frames {

// The five generic news frames.
enum class Frame : std::uint8_t {
  AttributionOfResponsibility = 0,
  HumanInterest = 1,
  Conflict = 2,
  Morality = 3,
  Economic = 4,
};

inline constexpr std::size_t kFrameCount = 5;

inline constexpr std::array<Frame, kFrameCount> kAllFrames = {
    Frame::AttributionOfResponsibility, Frame::HumanInterest, Frame::Conflict,
    Frame::Morality, Frame::Economic};

// A permutation of the five frames. Governs prompt layout, tie-breaking and
// row/column order of every report.
using FrameOrder = std::array<Frame, kFrameCount>;

inline constexpr FrameOrder kDefaultFrameOrder = kAllFrames;

// Dense per-frame storage indexed by the enum value, independent of order.
template <typename T>
using PerFrame = std::array<T, kFrameCount>;

constexpr std::size_t frame_index(Frame f) noexcept { return static_cast<std::size_t>(f); }

// Stable identifier used in JSON ("HumanInterest").
std::string_view frame_id(Frame f) noexcept;
// Display label ("Human interest").
std::string_view frame_label(Frame f) noexcept;
// Lowercase match strings used when reading model output.
std::span<const std::string_view> frame_aliases(Frame f) noexcept;

// Accepts the identifier, the display label or any alias, case-insensitively.
std::optional<Frame> parse_frame(std::string_view text);

class UnknownFrameLabel : public FramesError {
 public:
  explicit UnknownFrameLabel(std::string_view label)
      : FramesError("UnknownFrameLabel", "unknown frame label: '" + std::string(label) + "'") {}
};

// Like parse_frame but throws UnknownFrameLabel.
Frame frame_from_string(std::string_view text);

// Throws std::invalid_argument unless `order` is a permutation of the frames.
void validate_frame_order(const FrameOrder& order);

// Position of `f` within `order`.
std::size_t position_in(const FrameOrder& order, Frame f);

}  // namespace frames
