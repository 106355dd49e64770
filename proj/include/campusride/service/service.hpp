#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "campusride/accounts/accounts.hpp"
#include "campusride/dispatch/dispatch_queue.hpp"
#include "campusride/domain/clock.hpp"
#include "campusride/domain/types.hpp"
#include "campusride/geo/external_router.hpp"
#include "campusride/geo/road_graph.hpp"
#include "campusride/geo/router.hpp"
#include "campusride/realtime/event_sink.hpp"
#include "campusride/realtime/location_store.hpp"
#include "campusride/service/config.hpp"
#include "campusride/store/document_store.hpp"

namespace campusride::service {

using accounts::Session;

struct RideForm {
  GeoPoint pickup;
  GeoPoint dropoff;
  int seats{1};
};

struct ConfirmResult {
  RideRequest request;
  std::size_t position{};  // rank in the queue when enqueued
  double distance_m{};
  std::int64_t eta_s{};
  /// Set when the request resolved during the call (no car could be offered).
  std::optional<dispatch::OfferKind> outcome;
};

struct RejectResult {
  RequestState state{RequestState::Offered};
  bool terminal{false};
};

/// One rider-visible notification, retained for the life of the ride.
struct Notice {
  realtime::EventType type{realtime::EventType::DriverArrived};
  TimePoint at{};

  bool operator==(const Notice&) const = default;
};

struct TrackView {
  Ride ride;
  std::optional<realtime::LocationSample> sample;
  GeoPoint car_position;
  GeoPoint target;
  std::string target_leg;  // "pickup" or "dropoff"
  geo::Route route;
  bool route_external{false};
  bool rerouted{false};
  double deviation_m{};
  int reroutes{};
};

struct RideView {
  Ride ride;
  std::vector<Notice> notices;
};

/// The transport-agnostic service: every HTTP endpoint and realtime inbound
/// frame maps to one call here. Operations are serialized by one mutex; the
/// document store's compare-and-swap is the commit point for stage changes
/// and request claims, and every mutation is written before the call returns.
///
/// All state is rebuilt from the store on construction.
class Service {
 public:
  struct Deps {
    std::shared_ptr<store::DocumentStore> store;
    geo::RoadGraph graph;
    const Clock* clock{nullptr};
    realtime::EventSink* sink{nullptr};
    std::shared_ptr<geo::ExternalRouter> router;  // optional
  };

  Service(ServiceConfig config, Deps deps);

  /// Events go nowhere until a sink is attached.
  void attach_sink(realtime::EventSink* sink);

  // accounts
  UserAccount register_rider(const accounts::Registration& form);
  Session login(std::string_view username, std::string_view password);
  std::optional<Session> authenticate(std::string_view token);
  accounts::ReviewResult review(const Session& caller, const AccountId& id, accounts::Decision decision);
  std::vector<UserAccount> pending(const Session& caller) const;

  // dispatch
  ConfirmResult confirm_ride(const Session& caller, const RideForm& form);
  Ride accept_ride(const Session& caller, const RequestId& id);
  RejectResult reject_ride(const Session& caller, const RequestId& id);
  /// Resolves offers older than the offer timeout as rejected.
  std::size_t sweep_timeouts();

  // rides
  Ride advance_ride(const Session& caller, const RideId& id, RideStage target);
  bool publish_location(const Session& caller, GeoPoint point, TimePoint recorded_at);
  TrackView track(const Session& caller, const RideId& id);
  RideView ride(const Session& caller, const RideId& id) const;

  // operator tooling
  UserAccount bootstrap_admin(std::string_view username, std::string_view password);
  /// Registers a car plus its driver account (username = car id). Position
  /// defaults to the graph's first node.
  CarAgent provision_car(const CarId& id, int capacity, std::string_view password,
                         std::optional<GeoPoint> position = std::nullopt);

  // introspection
  [[nodiscard]] std::vector<CarAgent> fleet() const;
  [[nodiscard]] std::optional<Ride> find_ride(const RideId& id) const;
  [[nodiscard]] std::vector<Ride> rides() const;
  [[nodiscard]] std::vector<accounts::OutboxEmail> outbox() const { return accounts_.outbox(); }
  [[nodiscard]] const dispatch::DispatchQueue& queue() const noexcept { return queue_; }
  [[nodiscard]] const geo::RoadGraph& graph() const noexcept { return graph_; }
  [[nodiscard]] const ServiceConfig& config() const noexcept { return config_; }
  [[nodiscard]] std::uint64_t stale_samples() const noexcept { return locations_.stale_dropped(); }
  [[nodiscard]] std::uint64_t failed_deliveries() const;
  [[nodiscard]] TimePoint now() const { return clock_.now(); }

 private:
  struct ActiveRoute {
    GeoPoint target;
    geo::Route route;
    bool external{false};
  };

  struct RideRecord {
    Ride ride;
    std::vector<Notice> notices;
    store::Revision revision{};
    std::optional<ActiveRoute> route;
    int reroutes{};
  };

  struct RequestRecord {
    RideRequest request;
    std::vector<CarId> offered;
    std::vector<CarId> rejected_by;
    std::optional<TimePoint> offered_at;
    std::optional<dispatch::OfferOutcome> outcome;
    std::optional<RideId> ride_id;
    store::Revision revision{};
  };

  void recover();
  void dispatch_pending_locked();
  void resolve_locked(const RequestId& id, const dispatch::OfferOutcome& outcome, std::string_view reason);
  void sync_request_locked(const RequestId& id);
  void write_request_locked(RequestRecord& rec);
  void write_ride_locked(RideRecord& rec);
  void write_car_locked(const CarAgent& car);
  void finish_ride_locked(RideRecord& rec);
  bool emit_locked(const realtime::Address& to, realtime::EventType type, const std::optional<RideId>& ride,
                   nlohmann::json payload);

  [[nodiscard]] RideRecord& ride_for_participant_locked(const Session& caller, const RideId& id);
  [[nodiscard]] const RideRecord& ride_for_participant_locked(const Session& caller, const RideId& id) const;
  [[nodiscard]] bool rider_busy_locked(const AccountId& rider) const;

  ServiceConfig config_;
  std::shared_ptr<store::DocumentStore> store_;
  geo::RoadGraph graph_;
  const Clock& clock_;
  std::shared_ptr<geo::ExternalRouter> router_;
  accounts::AccountRegistry accounts_;
  realtime::LocationStore locations_;
  dispatch::DispatchQueue queue_;

  mutable std::mutex mu_;
  realtime::EventSink* sink_{nullptr};
  std::map<CarId, CarAgent> fleet_;
  std::map<RequestId, RequestRecord> requests_;
  std::map<RideId, RideRecord> rides_;
  std::map<AccountId, RequestId> pending_by_rider_;
  std::map<AccountId, RideId> active_by_rider_;
  std::map<CarId, RideId> active_by_car_;
  std::uint64_t last_request_number_{0};
  std::uint64_t last_ride_number_{0};
  std::uint64_t failed_deliveries_{0};
};

/// Wire forms used by the HTTP API and persistence.
[[nodiscard]] nlohmann::json notice_to_json(const Notice& n);
[[nodiscard]] nlohmann::json track_to_json(const TrackView& view);
[[nodiscard]] nlohmann::json ride_to_json(const RideView& view);

}  // namespace campusride::service
