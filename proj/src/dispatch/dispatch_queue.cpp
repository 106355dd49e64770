#include "campusride/dispatch/dispatch_queue.hpp"

#include <algorithm>
#include <iterator>

#include <fmt/format.h>

#include "campusride/domain/stage_machine.hpp"

namespace campusride::dispatch {

std::string_view to_string(OfferKind kind) noexcept {
  switch (kind) {
    case OfferKind::Accepted: return "accepted";
    case OfferKind::Rejected: return "rejected";
    case OfferKind::NoCarsAvailable: return "no-cars-available";
  }
  return "unknown";
}

Acceptance evaluate_acceptance(const CarAgent& car, const RideRequest& req) noexcept {
  return req.seats <= car.seats_available ? Acceptance::Accept : Acceptance::Reject;
}

std::vector<CarAgent> find_available_cars(std::span<const CarAgent> fleet) {
  std::vector<CarAgent> out;
  std::copy_if(fleet.begin(), fleet.end(), std::back_inserter(out), [](const CarAgent& c) { return c.available; });
  std::sort(out.begin(), out.end(), [](const CarAgent& a, const CarAgent& b) { return a.car_id < b.car_id; });
  return out;
}

std::vector<FieldIssue> validate_request(const RideRequest& req) {
  std::vector<FieldIssue> issues;
  if (req.request_id.empty()) issues.push_back({"request_id", "missing"});
  if (req.rider_id.empty()) issues.push_back({"rider_id", "missing"});
  if (!is_valid(req.pickup)) issues.push_back({"pickup", "coordinate out of range"});
  if (!is_valid(req.dropoff)) issues.push_back({"dropoff", "coordinate out of range"});
  if (is_valid(req.pickup) && req.pickup == req.dropoff) issues.push_back({"dropoff", "same as pickup"});
  if (req.seats < 1 || req.seats > kMaxSeats) {
    issues.push_back({"seats", fmt::format("must be between 1 and {}", kMaxSeats)});
  }
  if (req.state != RequestState::Queued) issues.push_back({"state", "must be queued"});
  return issues;
}

const DispatchQueue::Key* DispatchQueue::key_of(const RequestId& id) const {
  if (auto it = keys_.find(id); it != keys_.end()) return &it->second;
  return nullptr;
}

std::size_t DispatchQueue::enqueue_request(RideRequest req) {
  if (auto issues = validate_request(req); !issues.empty()) {
    throw Error(ErrorCode::InvalidRequest, "ride request failed validation", std::move(issues));
  }
  std::scoped_lock lock(mu_);
  if (keys_.contains(req.request_id) || resolved_.contains(req.request_id)) {
    throw Error(ErrorCode::DuplicateRequest, fmt::format("request {} already known", req.request_id.str()));
  }
  Key key{req.created_at, req.request_id};
  keys_.emplace(req.request_id, key);
  auto [it, inserted] = entries_.emplace(key, QueueEntry{std::move(req), {}, {}, std::nullopt});
  return static_cast<std::size_t>(std::distance(entries_.begin(), it));
}

std::optional<RideRequest> DispatchQueue::next_unoffered() const {
  std::scoped_lock lock(mu_);
  for (const auto& [key, entry] : entries_) {
    if (entry.request.state == RequestState::Queued) return entry.request;
  }
  return std::nullopt;
}

std::optional<OfferOutcome> DispatchQueue::offer(const RequestId& id, const std::vector<CarId>& cars, TimePoint now) {
  std::scoped_lock lock(mu_);
  const Key* key = key_of(id);
  if (key == nullptr) throw Error(ErrorCode::UnknownRequest, fmt::format("request {} is not queued", id.str()));
  for (auto& [k, entry] : entries_) {
    if (entry.request.state != RequestState::Queued) continue;
    if (k != *key) {
      throw Error(ErrorCode::InvalidArgument,
                  fmt::format("request {} must be offered before {}", entry.request.request_id.str(), id.str()));
    }
    if (cars.empty()) {
      const Key copy = k;
      resolve_locked(copy, OfferOutcome::no_cars());
      return OfferOutcome::no_cars();
    }
    entry.request.state = RequestState::Offered;
    entry.offered.insert(cars.begin(), cars.end());
    entry.offered_at = now;
    return std::nullopt;
  }
  throw Error(ErrorCode::InvalidArgument, fmt::format("request {} was already offered", id.str()));
}

void DispatchQueue::resolve_locked(const Key& key, OfferOutcome outcome) {
  auto it = entries_.find(key);
  Resolution res{it->second.request.request_id, it->second.request.rider_id, std::move(outcome)};
  keys_.erase(res.request_id);
  entries_.erase(it);
  const auto rid = res.request_id;
  resolved_.insert_or_assign(rid, std::move(res));
}

Ride DispatchQueue::claim_request(const RequestId& id, CarAgent& car, RideId ride_id, TimePoint now) {
  std::scoped_lock lock(mu_);
  const Key* key = key_of(id);
  if (key == nullptr) {
    if (resolved_.contains(id)) {
      throw Error(ErrorCode::AlreadyClaimed, fmt::format("request {} is already resolved", id.str()));
    }
    throw Error(ErrorCode::UnknownRequest, fmt::format("unknown request {}", id.str()));
  }
  auto& entry = entries_.at(*key);
  if (entry.request.state != RequestState::Offered || !entry.offered.contains(car.car_id) ||
      entry.rejected_by.contains(car.car_id)) {
    throw Error(ErrorCode::NotOffered, fmt::format("request {} is not on offer to {}", id.str(), car.car_id.str()));
  }
  if (!car.available) {
    throw Error(ErrorCode::CarUnavailable, fmt::format("car {} already has an active ride", car.car_id.str()));
  }
  if (evaluate_acceptance(car, entry.request) == Acceptance::Reject) {
    const int wanted = entry.request.seats;
    reject_locked(id, car.car_id);
    throw Error(ErrorCode::SeatMismatch,
                fmt::format("{} seats requested, {} available", wanted, car.seats_available), "seats");
  }

  Ride ride;
  ride.ride_id = std::move(ride_id);
  ride.request = entry.request;
  ride.request.state = RequestState::Accepted;
  ride.car_id = car.car_id;
  ride.stage = RideStage::StartJourney;
  const auto statuses = derive_leg_statuses(ride.stage);
  ride.pickup_status = statuses.pickup;
  ride.dropoff_status = statuses.dropoff;
  ride.history.push_back({RideStage::StartJourney, now});

  car.available = false;
  car.seats_available -= entry.request.seats;

  const Key copy = *key;
  resolve_locked(copy, OfferOutcome::accepted(car.car_id));
  return ride;
}

std::optional<OfferOutcome> DispatchQueue::reject_locked(const RequestId& id, const CarId& car) {
  const Key* key = key_of(id);
  if (key == nullptr) {
    if (resolved_.contains(id)) {
      throw Error(ErrorCode::AlreadyClaimed, fmt::format("request {} is already resolved", id.str()));
    }
    throw Error(ErrorCode::UnknownRequest, fmt::format("unknown request {}", id.str()));
  }
  auto& entry = entries_.at(*key);
  if (entry.request.state != RequestState::Offered || !entry.offered.contains(car)) {
    throw Error(ErrorCode::NotOffered, fmt::format("request {} is not on offer to {}", id.str(), car.str()));
  }
  entry.rejected_by.insert(car);
  if (entry.rejected_by.size() < entry.offered.size()) return std::nullopt;
  const Key copy = *key;
  resolve_locked(copy, OfferOutcome::rejected());
  return OfferOutcome::rejected();
}

std::optional<OfferOutcome> DispatchQueue::reject_request(const RequestId& id, const CarId& car) {
  std::scoped_lock lock(mu_);
  return reject_locked(id, car);
}

std::vector<Resolution> DispatchQueue::expire_offers(TimePoint now, Millis timeout) {
  std::scoped_lock lock(mu_);
  std::vector<Key> expired;
  for (const auto& [key, entry] : entries_) {
    if (entry.offered_at && now - *entry.offered_at >= timeout) expired.push_back(key);
  }
  std::vector<Resolution> out;
  for (const auto& key : expired) {
    const auto id = entries_.at(key).request.request_id;
    resolve_locked(key, OfferOutcome::rejected());
    out.push_back(resolved_.at(id));
  }
  return out;
}

std::vector<RideRequest> DispatchQueue::entries() const {
  std::scoped_lock lock(mu_);
  std::vector<RideRequest> out;
  out.reserve(entries_.size());
  for (const auto& [key, entry] : entries_) out.push_back(entry.request);
  return out;
}

std::set<RequestId> DispatchQueue::in_flight() const {
  std::scoped_lock lock(mu_);
  std::set<RequestId> out;
  for (const auto& [key, entry] : entries_) {
    if (entry.request.state == RequestState::Offered) out.insert(entry.request.request_id);
  }
  return out;
}

std::optional<QueueEntry> DispatchQueue::find(const RequestId& id) const {
  std::scoped_lock lock(mu_);
  if (const Key* key = key_of(id)) return entries_.at(*key);
  return std::nullopt;
}

std::optional<Resolution> DispatchQueue::resolution(const RequestId& id) const {
  std::scoped_lock lock(mu_);
  if (auto it = resolved_.find(id); it != resolved_.end()) return it->second;
  return std::nullopt;
}

std::size_t DispatchQueue::size() const {
  std::scoped_lock lock(mu_);
  return entries_.size();
}

void DispatchQueue::restore_entry(QueueEntry entry) {
  std::scoped_lock lock(mu_);
  Key key{entry.request.created_at, entry.request.request_id};
  keys_.insert_or_assign(entry.request.request_id, key);
  entries_.insert_or_assign(key, std::move(entry));
}

void DispatchQueue::restore_resolution(Resolution resolution) {
  std::scoped_lock lock(mu_);
  const auto id = resolution.request_id;
  resolved_.insert_or_assign(id, std::move(resolution));
}

}  // namespace campusride::dispatch
