#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "frames/frame.hpp"

namespace frames {

struct FrameDefinition {
  Frame frame;
  std::string definition_text;

  bool operator==(const FrameDefinition&) const = default;
};

// The five codebook definitions, in listing order: responsibility, human
// interest, conflict, morality, economic.
std::vector<FrameDefinition> default_frame_definitions();

// Placeholders:
//   definition_block_format: {label}, {definition}
//   text_block_format:       {text}
//   question:                {frames}  (display labels in frame_order)
// Substitution is a single pass, so placeholder-like sequences inside the
// substituted values are emitted literally.
struct PromptTemplate {
  std::string preamble;
  std::string definition_block_format;
  std::string text_block_format;
  std::string question;
  FrameOrder frame_order = kDefaultFrameOrder;

  static PromptTemplate defaults();
  bool operator==(const PromptTemplate&) const = default;
};

class PromptError : public FramesError {
 public:
  using FramesError::FramesError;
};

// preamble, one definition block per frame in frame_order, text block,
// question. Throws PromptError with code MissingFrameDefinition,
// DuplicateFrameDefinition or EmptyText.
std::string build_prompt(const PromptTemplate& tmpl, std::span<const FrameDefinition> definitions,
                         std::string_view text);

// Template override file: `key = value` lines (see README). Keys not present
// keep their default.
PromptTemplate load_prompt_template(const std::filesystem::path& path);
// JSONL of {"frame", "definition_text"}.
std::vector<FrameDefinition> load_frame_definitions(const std::filesystem::path& path);

// Replaces each {name} found in `fields` in one left-to-right pass.
std::string render_placeholders(
    std::string_view format, std::span<const std::pair<std::string_view, std::string_view>> fields);

}  // namespace frames
