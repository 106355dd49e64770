#include "campusride/realtime/location_store.hpp"

#include "campusride/domain/json.hpp"

namespace campusride::realtime {

namespace col = store::collections;
using nlohmann::json;

namespace {

LocationSample from_doc(const json& j) {
  return {CarId{j.at("car_id").get<std::string>()}, j.at("point").get<GeoPoint>(),
          from_millis(j.at("recorded_at").get<std::int64_t>())};
}

}  // namespace

bool LocationStore::publish(const LocationSample& sample) {
  std::scoped_lock lock(mu_);
  const auto current = store_->get(col::kLocations, sample.car_id.str());
  if (current && from_doc(current->doc).recorded_at > sample.recorded_at) {
    stale_.fetch_add(1);
    return false;
  }
  const json doc{{"car_id", sample.car_id.str()}, {"point", sample.point}, {"recorded_at", to_millis(sample.recorded_at)}};
  return store_->compare_and_swap(col::kLocations, sample.car_id.str(), current ? current->revision : 0, doc)
      .has_value();
}

std::optional<LocationSample> LocationStore::latest(const CarId& car) const {
  const auto v = store_->get(col::kLocations, car.str());
  if (!v) return std::nullopt;
  return from_doc(v->doc);
}

}  // namespace campusride::realtime
