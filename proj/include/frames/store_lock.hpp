#pragma once

#include <filesystem>

#include "frames/error.hpp"

namespace frames {

class StoreLocked : public FramesError {
 public:
  explicit StoreLocked(const std::filesystem::path& dir)
      : FramesError("StoreLocked", "another frames process holds the lock on " + dir.string()) {}
};

// Exclusive advisory lock on `<dir>/.frames.lock`, held for the object's
// lifetime. Throws StoreLocked if already held.
class StoreLock {
 public:
  explicit StoreLock(const std::filesystem::path& dir);
  ~StoreLock();
  StoreLock(const StoreLock&) = delete;
  StoreLock& operator=(const StoreLock&) = delete;

 private:
  int fd_ = -1;
};

}  // namespace frames
