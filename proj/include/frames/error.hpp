#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace frames {

// Base class for every error raised by the library. `code()` is a stable,
// machine-readable identifier used in failure reports and HTTP error bodies.
class FramesError : public std::runtime_error {
 public:
  FramesError(std::string code, const std::string& message)
      : std::runtime_error(message), code_(std::move(code)) {}

  const std::string& code() const noexcept { return code_; }

 private:
  std::string code_;
};

class IoError : public FramesError {
 public:
  explicit IoError(const std::string& message) : FramesError("IoError", message) {}
};

}  // namespace frames
