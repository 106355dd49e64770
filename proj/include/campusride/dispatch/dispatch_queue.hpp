#pragma once

#include <cstddef>
#include <map>
#include <mutex>
#include <optional>
#include <set>
#include <span>
#include <utility>
#include <vector>

#include "campusride/domain/clock.hpp"
#include "campusride/domain/error.hpp"
#include "campusride/domain/types.hpp"

namespace campusride::dispatch {

inline constexpr Millis kDefaultOfferTimeout{30'000};

enum class OfferKind : std::uint8_t { Accepted, Rejected, NoCarsAvailable };

/// Terminal result of dispatching one request.
struct OfferOutcome {
  OfferKind kind{OfferKind::Rejected};
  std::optional<CarId> car_id;  // set iff Accepted

  static OfferOutcome accepted(CarId car) { return {OfferKind::Accepted, std::move(car)}; }
  static OfferOutcome rejected() { return {OfferKind::Rejected, std::nullopt}; }
  static OfferOutcome no_cars() { return {OfferKind::NoCarsAvailable, std::nullopt}; }

  bool operator==(const OfferOutcome&) const = default;
};

std::string_view to_string(OfferKind kind) noexcept;

enum class Acceptance : std::uint8_t { Accept, Reject };

/// Accept iff the requested seats fit in the car's free seats.
[[nodiscard]] Acceptance evaluate_acceptance(const CarAgent& car, const RideRequest& req) noexcept;

/// Cars eligible for an offer, ordered by car_id. Seat fit is not checked here:
/// that is the driver's decision.
[[nodiscard]] std::vector<CarAgent> find_available_cars(std::span<const CarAgent> fleet);

/// Field-by-field invariant check of a request as submitted.
[[nodiscard]] std::vector<FieldIssue> validate_request(const RideRequest& req);

struct QueueEntry {
  RideRequest request;
  std::set<CarId> offered;
  std::set<CarId> rejected_by;
  std::optional<TimePoint> offered_at;
};

struct Resolution {
  RequestId request_id;
  AccountId rider_id;
  OfferOutcome outcome;
};

/// FIFO queue of unresolved ride requests and the decision point for who
/// serves them. Entries are ordered by (created_at, request_id). Every
/// operation is linearizable.
///
/// A request moves Queued -> Offered -> {Accepted, Rejected}. It leaves the
/// queue when it reaches a terminal state and is remembered afterwards so a
/// late claim or rejection gets AlreadyClaimed rather than UnknownRequest.
class DispatchQueue {
 public:
  /// Returns the 0-based rank. Throws InvalidRequest (with per-field issues)
  /// or DuplicateRequest.
  std::size_t enqueue_request(RideRequest req);

  /// Earliest entry that has not been offered yet.
  [[nodiscard]] std::optional<RideRequest> next_unoffered() const;

  /// Broadcast the earliest unoffered request to `cars`. Offers are strictly
  /// FIFO: offering any other request throws InvalidArgument. An empty car
  /// list resolves the request immediately as NoCarsAvailable.
  std::optional<OfferOutcome> offer(const RequestId& id, const std::vector<CarId>& cars, TimePoint now);

  /// Atomically binds `car` to the request. On success the car is marked
  /// unavailable and its free seats reduced, the request leaves the queue,
  /// and a Ride at StartJourney is returned.
  ///
  /// Throws UnknownRequest, AlreadyClaimed (request already resolved),
  /// NotOffered, CarUnavailable or SeatMismatch. A seat mismatch counts as
  /// that car's rejection.
  Ride claim_request(const RequestId& id, CarAgent& car, RideId ride_id, TimePoint now);

  /// Records a rejection. Returns the terminal outcome once every offered car
  /// has rejected. Throws UnknownRequest, AlreadyClaimed or NotOffered.
  std::optional<OfferOutcome> reject_request(const RequestId& id, const CarId& car);

  /// Resolves as Rejected every offer older than `timeout` at `now`.
  std::vector<Resolution> expire_offers(TimePoint now, Millis timeout);

  [[nodiscard]] std::vector<RideRequest> entries() const;
  [[nodiscard]] std::set<RequestId> in_flight() const;
  [[nodiscard]] std::optional<QueueEntry> find(const RequestId& id) const;
  [[nodiscard]] std::optional<Resolution> resolution(const RequestId& id) const;
  [[nodiscard]] std::size_t size() const;

  /// Recovery: reinstate persisted state without re-validating FIFO history.
  void restore_entry(QueueEntry entry);
  void restore_resolution(Resolution resolution);

 private:
  using Key = std::pair<TimePoint, RequestId>;

  std::optional<OfferOutcome> reject_locked(const RequestId& id, const CarId& car);
  void resolve_locked(const Key& key, OfferOutcome outcome);
  [[nodiscard]] const Key* key_of(const RequestId& id) const;

  mutable std::mutex mu_;
  std::map<Key, QueueEntry> entries_;
  std::map<RequestId, Key> keys_;
  std::map<RequestId, Resolution> resolved_;
};

}  // namespace campusride::dispatch
