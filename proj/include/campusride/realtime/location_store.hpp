#pragma once

#include <atomic>
#include <memory>
#include <mutex>
#include <optional>

#include "campusride/domain/clock.hpp"
#include "campusride/domain/geo_point.hpp"
#include "campusride/domain/ids.hpp"
#include "campusride/store/document_store.hpp"

namespace campusride::realtime {

struct LocationSample {
  CarId car_id;
  GeoPoint point;
  TimePoint recorded_at{};

  bool operator==(const LocationSample&) const = default;
};

/// Latest GPS sample per car, persisted in the `locations` collection.
class LocationStore {
 public:
  explicit LocationStore(std::shared_ptr<store::DocumentStore> store) : store_(std::move(store)) {}

  /// Stores the sample unless it is older than the stored one. Stale samples
  /// are counted and dropped; returns whether the sample was kept.
  bool publish(const LocationSample& sample);

  [[nodiscard]] std::optional<LocationSample> latest(const CarId& car) const;
  [[nodiscard]] std::uint64_t stale_dropped() const noexcept { return stale_.load(); }

 private:
  std::shared_ptr<store::DocumentStore> store_;
  std::mutex mu_;
  std::atomic<std::uint64_t> stale_{0};
};

}  // namespace campusride::realtime
