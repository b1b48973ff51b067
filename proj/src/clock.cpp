#include "frames/clock.hpp"

#include <cstdio>
#include <cstdlib>
#include <stdexcept>
#include <thread>

namespace frames {

std::string format_timestamp(Timestamp t) {
  const auto day = std::chrono::floor<std::chrono::days>(t);
  const std::chrono::year_month_day ymd{day};
  const std::chrono::hh_mm_ss hms{t - day};
  char buf[32];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02d:%02d:%02dZ", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()),
                static_cast<int>(hms.hours().count()), static_cast<int>(hms.minutes().count()),
                static_cast<int>(hms.seconds().count()));
  return buf;
}

Timestamp parse_timestamp(std::string_view text) {
  int y = 0, mo = 0, d = 0, h = 0, mi = 0, s = 0;
  char tail = 0;
  const std::string copy(text);
  if (std::sscanf(copy.c_str(), "%4d-%2d-%2dT%2d:%2d:%2d%c", &y, &mo, &d, &h, &mi, &s, &tail) != 7 ||
      tail != 'Z' || copy.size() != 20) {
    throw std::invalid_argument("bad timestamp '" + copy + "', expected YYYY-MM-DDTHH:MM:SSZ");
  }
  const std::chrono::year_month_day ymd{std::chrono::year{y}, std::chrono::month{unsigned(mo)},
                                        std::chrono::day{unsigned(d)}};
  if (!ymd.ok() || h > 23 || mi > 59 || s > 60) {
    throw std::invalid_argument("bad timestamp '" + copy + "'");
  }
  return std::chrono::sys_days{ymd} + std::chrono::hours{h} + std::chrono::minutes{mi} +
         std::chrono::seconds{s};
}

SystemClock::SystemClock() {
  if (const char* epoch = std::getenv("SOURCE_DATE_EPOCH"); epoch != nullptr && *epoch != '\0') {
    char* end = nullptr;
    const long long secs = std::strtoll(epoch, &end, 10);
    if (end != nullptr && *end == '\0') pinned_ = Timestamp{std::chrono::seconds{secs}};
  }
}

Timestamp SystemClock::wall_now() {
  if (pinned_) return *pinned_;
  return std::chrono::floor<std::chrono::seconds>(std::chrono::system_clock::now());
}

Clock::Monotonic SystemClock::monotonic_now() {
  return std::chrono::steady_clock::now().time_since_epoch();
}

void SystemClock::sleep_until(Monotonic deadline) {
  std::this_thread::sleep_until(std::chrono::steady_clock::time_point{
      std::chrono::duration_cast<std::chrono::steady_clock::duration>(deadline)});
}

FakeClock::FakeClock(Timestamp wall_start) : wall_start_(wall_start) {}

Timestamp FakeClock::wall_now() {
  std::lock_guard lock(mu_);
  return wall_start_ + std::chrono::floor<std::chrono::seconds>(now_);
}

Clock::Monotonic FakeClock::monotonic_now() {
  std::lock_guard lock(mu_);
  return now_;
}

void FakeClock::sleep_until(Monotonic deadline) {
  std::lock_guard lock(mu_);
  if (deadline > now_) {
    sleeps_.push_back(deadline - now_);
    now_ = deadline;
  }
}

void FakeClock::advance(Monotonic d) {
  std::lock_guard lock(mu_);
  now_ += d;
}

std::vector<Clock::Monotonic> FakeClock::sleeps() const {
  std::lock_guard lock(mu_);
  return sleeps_;
}

std::shared_ptr<Clock> system_clock() { return std::make_shared<SystemClock>(); }

}  // namespace frames
