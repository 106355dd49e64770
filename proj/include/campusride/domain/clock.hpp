#pragma once

#include <atomic>
#include <chrono>
#include <cstdint>

namespace campusride {

using Millis = std::chrono::milliseconds;
using TimePoint = std::chrono::time_point<std::chrono::system_clock, Millis>;

inline std::int64_t to_millis(TimePoint t) noexcept { return t.time_since_epoch().count(); }
inline TimePoint from_millis(std::int64_t ms) noexcept { return TimePoint{Millis{ms}}; }

/// Injectable service time source.
class Clock {
 public:
  virtual ~Clock() = default;
  [[nodiscard]] virtual TimePoint now() const = 0;
};

class SystemClock final : public Clock {
 public:
  [[nodiscard]] TimePoint now() const override {
    return std::chrono::time_point_cast<Millis>(std::chrono::system_clock::now());
  }
};

/// Virtual time. Only moves when told to.
class ManualClock final : public Clock {
 public:
  explicit ManualClock(TimePoint start = from_millis(1'735'689'600'000))  // 2025-01-01T00:00:00Z
      : ms_(to_millis(start)) {}

  [[nodiscard]] TimePoint now() const override { return from_millis(ms_.load()); }
  void advance(Millis by) { ms_.fetch_add(by.count()); }
  void set(TimePoint t) { ms_.store(to_millis(t)); }

 private:
  std::atomic<std::int64_t> ms_;
};

}  // namespace campusride
