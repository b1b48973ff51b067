#pragma once

#include <chrono>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace frames {

using Timestamp = std::chrono::sys_seconds;

// ISO-8601 UTC, second precision: "2024-03-01T12:00:00Z".
std::string format_timestamp(Timestamp t);
Timestamp parse_timestamp(std::string_view text);

// Source of wall-clock stamps for records and of monotonic time for rate
// limiting and retry backoff. Injected everywhere time matters so tests can
// run against a fake.
class Clock {
 public:
  using Monotonic = std::chrono::nanoseconds;

  virtual ~Clock() = default;
  virtual Timestamp wall_now() = 0;
  virtual Monotonic monotonic_now() = 0;
  virtual void sleep_until(Monotonic deadline) = 0;

  void sleep_for(Monotonic duration) { sleep_until(monotonic_now() + duration); }
};

// Real time. If SOURCE_DATE_EPOCH is set, wall_now() is pinned to it so that
// offline runs produce byte-identical stores.
class SystemClock final : public Clock {
 public:
  SystemClock();
  Timestamp wall_now() override;
  Monotonic monotonic_now() override;
  void sleep_until(Monotonic deadline) override;

 private:
  std::optional<Timestamp> pinned_;
};

// Deterministic clock: sleeping advances time instantly. Thread-safe.
class FakeClock final : public Clock {
 public:
  explicit FakeClock(Timestamp wall_start = Timestamp{std::chrono::seconds{1'700'000'000}});

  Timestamp wall_now() override;
  Monotonic monotonic_now() override;
  void sleep_until(Monotonic deadline) override;

  void advance(Monotonic d);
  std::vector<Monotonic> sleeps() const;

 private:
  mutable std::mutex mu_;
  Timestamp wall_start_;
  Monotonic now_{0};
  std::vector<Monotonic> sleeps_;
};

std::shared_ptr<Clock> system_clock();

}  // namespace frames
