#include "frames/prompt.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <sstream>

#include "frames/jsonl.hpp"

namespace frames {

std::vector<FrameDefinition> default_frame_definitions() {
  return {
      {Frame::AttributionOfResponsibility,
       "This frame presents an issue or problem in such a way as to attribute responsibility for "
       "its cause or solution to either the government or to an individual or group."},
      {Frame::HumanInterest,
       "This frame brings a human face or an emotional angle to the presentation of an event, "
       "issue, or problem."},
      {Frame::Conflict,
       "This frame emphasizes conflict between individuals, groups, or institutions as a means of "
       "capturing audience interest."},
      {Frame::Morality,
       "This frame puts the event, problem, or issue in the context of religious tenets or moral "
       "prescriptions."},
      {Frame::Economic,
       "This frame reports an event, problem, or issue in terms of the consequences it will have "
       "economically on an individual, group, institution, region, or country."},
  };
}

PromptTemplate PromptTemplate::defaults() {
  PromptTemplate t;
  t.preamble = "The following are definitions of five types of news frames.\n\n";
  t.definition_block_format = "{label}: {definition}\n";
  t.text_block_format = "\nText:\n\"\"\"\n{text}\n\"\"\"\n\n";
  t.question =
      "Among the following five frames ({frames}), which one is the most predominant in "
      "the text above? Answer with the frame name only.\nAnswer:";
  return t;
}

std::string render_placeholders(
    std::string_view format, std::span<const std::pair<std::string_view, std::string_view>> fields) {
  std::string out;
  out.reserve(format.size());
  std::size_t i = 0;
  while (i < format.size()) {
    if (format[i] == '{') {
      const auto close = format.find('}', i + 1);
      if (close != std::string_view::npos) {
        const auto name = format.substr(i + 1, close - i - 1);
        bool replaced = false;
        for (const auto& [key, value] : fields) {
          if (key == name) {
            out += value;
            replaced = true;
            break;
          }
        }
        if (replaced) {
          i = close + 1;
          continue;
        }
      }
    }
    out.push_back(format[i++]);
  }
  return out;
}

std::string build_prompt(const PromptTemplate& tmpl, std::span<const FrameDefinition> definitions,
                         std::string_view text) {
  validate_frame_order(tmpl.frame_order);
  std::array<const FrameDefinition*, kFrameCount> by_frame{};
  for (const auto& def : definitions) {
    auto& slot = by_frame[frame_index(def.frame)];
    if (slot != nullptr) {
      throw PromptError("DuplicateFrameDefinition",
                        "frame defined twice: " + std::string(frame_label(def.frame)));
    }
    if (def.definition_text.empty()) {
      throw PromptError("MissingFrameDefinition",
                        "empty definition for " + std::string(frame_label(def.frame)));
    }
    slot = &def;
  }
  for (Frame f : kAllFrames) {
    if (by_frame[frame_index(f)] == nullptr) {
      throw PromptError("MissingFrameDefinition", "no definition for " + std::string(frame_label(f)));
    }
  }
  if (text.empty()) throw PromptError("EmptyText", "text to classify is empty");

  std::string labels;
  for (std::size_t i = 0; i < tmpl.frame_order.size(); ++i) {
    if (i) labels += ", ";
    labels += frame_label(tmpl.frame_order[i]);
  }

  std::string prompt = tmpl.preamble;
  for (Frame f : tmpl.frame_order) {
    const std::pair<std::string_view, std::string_view> fields[] = {
        {"label", frame_label(f)}, {"definition", by_frame[frame_index(f)]->definition_text}};
    prompt += render_placeholders(tmpl.definition_block_format, fields);
  }
  const std::pair<std::string_view, std::string_view> text_field[] = {{"text", text}};
  prompt += render_placeholders(tmpl.text_block_format, text_field);
  const std::pair<std::string_view, std::string_view> frames_field[] = {{"frames", labels}};
  prompt += render_placeholders(tmpl.question, frames_field);
  return prompt;
}

PromptTemplate load_prompt_template(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  std::vector<CLI::ConfigItem> items;
  try {
    items = CLI::ConfigTOML().from_config(in);
  } catch (const CLI::Error& e) {
    throw PromptError("InvalidTemplate", path.string() + ": " + e.what());
  }

  auto t = PromptTemplate::defaults();
  try {
    for (const auto& item : items) {
      if (item.name == "++" || item.name == "--") continue;  // section markers
      const auto& key = item.name;
      if (item.inputs.empty()) throw std::invalid_argument(path.string() + ": '" + key + "' has no value");
      if (key == "frame_order") {
        std::vector<std::string> names = item.inputs;
        if (names.size() == 1) {
          // Also accept a single comma-separated string.
          names.clear();
          std::stringstream ss(item.inputs.front());
          for (std::string part; std::getline(ss, part, ',');) names.push_back(part);
        }
        if (names.size() != kFrameCount) {
          throw std::invalid_argument(path.string() + ": frame_order must name five frames");
        }
        FrameOrder order{};
        for (std::size_t i = 0; i < kFrameCount; ++i) order[i] = frame_from_string(names[i]);
        validate_frame_order(order);
        t.frame_order = order;
        continue;
      }
      if (item.inputs.size() != 1) {
        throw std::invalid_argument(path.string() + ": '" + key + "' must be a single string");
      }
      const auto& value = item.inputs.front();
      if (key == "preamble") {
        t.preamble = value;
      } else if (key == "definition_block_format") {
        t.definition_block_format = value;
      } else if (key == "text_block_format") {
        t.text_block_format = value;
      } else if (key == "question") {
        t.question = value;
      } else {
        throw std::invalid_argument(path.string() + ": unknown template key '" + key + "'");
      }
    }
  } catch (const std::invalid_argument& e) {
    throw PromptError("InvalidTemplate", e.what());
  }
  return t;
}

std::vector<FrameDefinition> load_frame_definitions(const std::filesystem::path& path) {
  std::vector<FrameDefinition> defs;
  for (const auto& row : read_jsonl(path)) {
    defs.push_back({frame_from_string(require_string(row, "frame")),
                    require_string(row, "definition_text")});
  }
  return defs;
}

}  // namespace frames
