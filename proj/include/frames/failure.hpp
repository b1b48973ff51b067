#pragma once

#include <string>
#include <vector>

#include "frames/jsonl.hpp"

namespace frames {

// One per-item failure from a corpus-wide stage.
struct ItemFailure {
  std::string item_id;
  std::string code;
  std::string message;

  bool operator==(const ItemFailure&) const = default;
};

inline Json to_json(const ItemFailure& f) {
  return Json{{"item_id", f.item_id}, {"error", f.code}, {"message", f.message}};
}

}  // namespace frames
