#include "campusride/service/service.hpp"

#include <algorithm>
#include <charconv>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "campusride/domain/json.hpp"
#include "campusride/domain/stage_machine.hpp"
#include "campusride/geo/haversine.hpp"
#include "campusride/geo/reroute.hpp"

namespace campusride::service {

namespace col = store::collections;
using nlohmann::json;
using realtime::Address;
using realtime::EventType;

namespace {

accounts::AccountRegistry::Options registry_options(const ServiceConfig& c) {
  accounts::AccountRegistry::Options o;
  o.hash_cost = c.fast_password_hashing ? accounts::HashCost::minimal() : accounts::HashCost::interactive();
  o.session_ttl = c.session_ttl;
  o.outbox_dir = c.outbox_dir;
  return o;
}

const Clock& require_clock(const Clock* clock) {
  if (clock == nullptr) throw Error(ErrorCode::InvalidArgument, "service needs a clock");
  return *clock;
}

std::uint64_t serial_of(std::string_view id, std::string_view prefix) {
  if (id.substr(0, prefix.size()) != prefix) return 0;
  id.remove_prefix(prefix.size());
  std::uint64_t n = 0;
  auto [ptr, ec] = std::from_chars(id.data(), id.data() + id.size(), n);
  return ec == std::errc{} && ptr == id.data() + id.size() ? n : 0;
}

void require_role(const Session& caller, Role role, std::string_view what) {
  if (caller.role != role) {
    throw Error(ErrorCode::NotAuthorized, fmt::format("only {}s may {}", to_string(role), what));
  }
}

const CarId& require_driver(const Session& caller, std::string_view what) {
  require_role(caller, Role::Driver, what);
  if (!caller.car_id) throw Error(ErrorCode::NotAuthorized, "driver account has no car");
  return *caller.car_id;
}

json ids_to_json(const std::vector<CarId>& ids) {
  json out = json::array();
  for (const auto& id : ids) out.push_back(id.str());
  return out;
}

std::vector<CarId> ids_from_json(const json& j) {
  std::vector<CarId> out;
  for (const auto& v : j) out.emplace_back(v.get<std::string>());
  return out;
}

json offer_payload(const RideRequest& r) {
  return {{"request_id", r.request_id.str()}, {"rider_id", r.rider_id.str()}, {"pickup", r.pickup},
          {"dropoff", r.dropoff},         {"seats", r.seats},             {"created_at", to_millis(r.created_at)}};
}

std::optional<EventType> notice_for(RideStage stage) {
  if (stage == RideStage::IHaveArrived) return EventType::DriverArrived;
  if (stage == RideStage::EndRide) return EventType::RideEnded;
  return std::nullopt;
}

RideStage notice_stage(EventType type) {
  return type == EventType::DriverArrived ? RideStage::IHaveArrived : RideStage::EndRide;
}

}  // namespace

json notice_to_json(const Notice& n) { return {{"type", realtime::to_string(n.type)}, {"at", to_millis(n.at)}}; }

Service::Service(ServiceConfig config, Deps deps)
    : config_(std::move(config)),
      store_(std::move(deps.store)),
      graph_(std::move(deps.graph)),
      clock_(require_clock(deps.clock)),
      router_(std::move(deps.router)),
      accounts_(store_, clock_, registry_options(config_)),
      locations_(store_),
      sink_(deps.sink) {
  graph_.validate();
  recover();
}

void Service::attach_sink(realtime::EventSink* sink) {
  std::scoped_lock lock(mu_);
  sink_ = sink;
}

std::uint64_t Service::failed_deliveries() const {
  std::scoped_lock lock(mu_);
  return failed_deliveries_;
}

// ---------------------------------------------------------------- recovery

void Service::recover() {
  std::scoped_lock lock(mu_);
  for (const auto& [key, v] : store_->scan(col::kCars)) {
    auto car = v.doc.get<CarAgent>();
    if (auto sample = locations_.latest(car.car_id)) {
      car.position = sample->point;
      car.position_updated_at = sample->recorded_at;
    }
    fleet_.emplace(car.car_id, std::move(car));
  }

  std::map<RequestId, RideId> ride_of_request;
  for (const auto& [key, v] : store_->scan(col::kRides)) {
    RideRecord rec;
    rec.ride = v.doc.at("ride").get<Ride>();
    for (const auto& n : v.doc.value("notices", json::array())) {
      auto type = realtime::parse_event_type(n.at("type").get<std::string>());
      if (type) rec.notices.push_back({*type, from_millis(n.at("at").get<std::int64_t>())});
    }
    rec.revision = v.revision;
    last_ride_number_ = std::max(last_ride_number_, serial_of(key, "ride-"));
    ride_of_request.emplace(rec.ride.request.request_id, rec.ride.ride_id);
    if (rec.ride.active()) {
      active_by_rider_[rec.ride.request.rider_id] = rec.ride.ride_id;
      active_by_car_[rec.ride.car_id] = rec.ride.ride_id;
    }
    rides_.emplace(rec.ride.ride_id, std::move(rec));
  }

  // Availability follows from the active rides, whatever the car documents say.
  for (auto& [id, car] : fleet_) {
    auto it = active_by_car_.find(id);
    const int held = it == active_by_car_.end() ? 0 : rides_.at(it->second).ride.request.seats;
    car.seats_available = car.capacity - held;
    car.available = held == 0;
  }

  for (const auto& [key, v] : store_->scan(col::kRequests)) {
    RequestRecord rec;
    rec.request = v.doc.at("request").get<RideRequest>();
    rec.offered = ids_from_json(v.doc.value("offered", json::array()));
    rec.rejected_by = ids_from_json(v.doc.value("rejected_by", json::array()));
    if (v.doc.contains("offered_at")) rec.offered_at = from_millis(v.doc.at("offered_at").get<std::int64_t>());
    if (v.doc.contains("outcome")) {
      const auto& o = v.doc.at("outcome");
      const auto kind = o.at("kind").get<std::string>();
      if (kind == "accepted") {
        rec.outcome = dispatch::OfferOutcome::accepted(CarId{o.at("car_id").get<std::string>()});
      } else if (kind == "no-cars-available") {
        rec.outcome = dispatch::OfferOutcome::no_cars();
      } else {
        rec.outcome = dispatch::OfferOutcome::rejected();
      }
    }
    if (v.doc.contains("ride_id")) rec.ride_id = RideId{v.doc.at("ride_id").get<std::string>()};
    rec.revision = v.revision;
    last_request_number_ = std::max(last_request_number_, serial_of(key, "req-"));

    // A ride written before its request document was updated still wins.
    if (auto it = ride_of_request.find(rec.request.request_id); it != ride_of_request.end()) {
      const auto& ride = rides_.at(it->second).ride;
      rec.ride_id = ride.ride_id;
      rec.outcome = dispatch::OfferOutcome::accepted(ride.car_id);
      rec.request.state = RequestState::Accepted;
    }

    if (rec.outcome) {
      queue_.restore_resolution({rec.request.request_id, rec.request.rider_id, *rec.outcome});
    } else {
      dispatch::QueueEntry entry{rec.request, {rec.offered.begin(), rec.offered.end()},
                                 {rec.rejected_by.begin(), rec.rejected_by.end()}, rec.offered_at};
      queue_.restore_entry(std::move(entry));
      pending_by_rider_[rec.request.rider_id] = rec.request.request_id;
    }
    requests_.emplace(rec.request.request_id, std::move(rec));
  }

  if (!fleet_.empty() || !rides_.empty() || !requests_.empty()) {
    spdlog::info("recovered {} cars, {} rides ({} active), {} requests ({} open)", fleet_.size(), rides_.size(),
                 active_by_car_.size(), requests_.size(), queue_.size());
  }
}

// ------------------------------------------------------------- persistence

void Service::write_request_locked(RequestRecord& rec) {
  json doc{{"request", rec.request}, {"offered", ids_to_json(rec.offered)}, {"rejected_by", ids_to_json(rec.rejected_by)}};
  if (rec.offered_at) doc["offered_at"] = to_millis(*rec.offered_at);
  if (rec.outcome) {
    json o{{"kind", dispatch::to_string(rec.outcome->kind)}};
    if (rec.outcome->car_id) o["car_id"] = rec.outcome->car_id->str();
    doc["outcome"] = std::move(o);
  }
  if (rec.ride_id) doc["ride_id"] = rec.ride_id->str();
  auto rev = store_->compare_and_swap(col::kRequests, rec.request.request_id.str(), rec.revision, doc);
  if (!rev) {
    throw Error(ErrorCode::StoreFailure, fmt::format("request {} changed underneath", rec.request.request_id.str()));
  }
  rec.revision = *rev;
}

void Service::write_ride_locked(RideRecord& rec) {
  json notices = json::array();
  for (const auto& n : rec.notices) notices.push_back(notice_to_json(n));
  json doc{{"ride", rec.ride}, {"notices", std::move(notices)}};
  auto rev = store_->compare_and_swap(col::kRides, rec.ride.ride_id.str(), rec.revision, doc);
  if (!rev) throw Error(ErrorCode::StaleRide, fmt::format("ride {} changed underneath", rec.ride.ride_id.str()));
  rec.revision = *rev;
}

void Service::write_car_locked(const CarAgent& car) { store_->put(col::kCars, car.car_id.str(), json(car)); }

void Service::sync_request_locked(const RequestId& id) {
  auto& rec = requests_.at(id);
  if (auto entry = queue_.find(id)) {
    rec.request.state = entry->request.state;
    rec.offered.assign(entry->offered.begin(), entry->offered.end());
    rec.rejected_by.assign(entry->rejected_by.begin(), entry->rejected_by.end());
    rec.offered_at = entry->offered_at;
  } else if (auto res = queue_.resolution(id)) {
    rec.outcome = res->outcome;
    rec.request.state =
        res->outcome.kind == dispatch::OfferKind::Accepted ? RequestState::Accepted : RequestState::Rejected;
  }
  write_request_locked(rec);
}

// ------------------------------------------------------------------ events

bool Service::emit_locked(const Address& to, EventType type, const std::optional<RideId>& ride, json payload) {
  realtime::EventEnvelope e;
  e.type = type;
  e.ride_id = ride;
  e.to = {to};
  e.payload = std::move(payload);
  e.sent_at = clock_.now();
  const bool ok = sink_ != nullptr && sink_->deliver(to, std::move(e));
  if (!ok) {
    ++failed_deliveries_;
    spdlog::warn("{} to {} not delivered: no live connection", realtime::to_string(type), to.str());
  }
  return ok;
}

void Service::resolve_locked(const RequestId& id, const dispatch::OfferOutcome& outcome, std::string_view reason) {
  sync_request_locked(id);
  const auto& req = requests_.at(id).request;
  pending_by_rider_.erase(req.rider_id);
  json payload{{"request_id", id.str()}, {"reason", reason}};
  const auto type = outcome.kind == dispatch::OfferKind::NoCarsAvailable ? EventType::NoCarsAvailable
                                                                         : EventType::RideRejected;
  emit_locked(Address::account(req.rider_id), type, std::nullopt, std::move(payload));
}

void Service::dispatch_pending_locked() {
  while (auto next = queue_.next_unoffered()) {
    std::vector<CarAgent> cars;
    cars.reserve(fleet_.size());
    for (const auto& [id, car] : fleet_) cars.push_back(car);
    std::vector<CarId> delivered;
    const auto payload = offer_payload(*next);
    for (const auto& car : dispatch::find_available_cars(cars)) {
      if (emit_locked(Address::car(car.car_id), EventType::RideRequest, std::nullopt, payload)) {
        delivered.push_back(car.car_id);
      }
    }
    if (auto outcome = queue_.offer(next->request_id, delivered, clock_.now())) {
      resolve_locked(next->request_id, *outcome, "no cars available");
    } else {
      sync_request_locked(next->request_id);
    }
  }
}

// ---------------------------------------------------------------- accounts

UserAccount Service::register_rider(const accounts::Registration& form) { return accounts_.register_account(form); }

Session Service::login(std::string_view username, std::string_view password) {
  return accounts_.login(username, password);
}

std::optional<Session> Service::authenticate(std::string_view token) { return accounts_.authenticate(token); }

accounts::ReviewResult Service::review(const Session& caller, const AccountId& id, accounts::Decision decision) {
  return accounts_.admin_review(caller, id, decision);
}

std::vector<UserAccount> Service::pending(const Session& caller) const {
  require_role(caller, Role::Admin, "list pending registrations");
  return accounts_.pending();
}

UserAccount Service::bootstrap_admin(std::string_view username, std::string_view password) {
  return accounts_.provision(Role::Admin, username, password);
}

CarAgent Service::provision_car(const CarId& id, int capacity, std::string_view password,
                                std::optional<GeoPoint> position) {
  if (id.empty()) throw Error(ErrorCode::InvalidField, "car id is required", "id");
  if (capacity < 1 || capacity > kMaxSeats) {
    throw Error(ErrorCode::InvalidField, fmt::format("capacity must be between 1 and {}", kMaxSeats), "capacity");
  }
  if (position && !is_valid(*position)) throw Error(ErrorCode::InvalidField, "position out of range", "position");
  {
    std::scoped_lock lock(mu_);
    if (fleet_.contains(id)) throw Error(ErrorCode::DuplicateIdentity, fmt::format("car {} exists", id.str()), "id");
  }
  accounts_.provision(Role::Driver, id.str(), password, id);

  CarAgent car;
  car.car_id = id;
  car.capacity = capacity;
  car.seats_available = capacity;
  car.available = true;
  car.position = position.value_or(graph_.position_at(0));
  car.position_updated_at = clock_.now();
  std::scoped_lock lock(mu_);
  write_car_locked(car);
  fleet_.insert_or_assign(id, car);
  return car;
}

// ---------------------------------------------------------------- dispatch

bool Service::rider_busy_locked(const AccountId& rider) const {
  return pending_by_rider_.contains(rider) || active_by_rider_.contains(rider);
}

ConfirmResult Service::confirm_ride(const Session& caller, const RideForm& form) {
  require_role(caller, Role::Rider, "request rides");

  std::vector<FieldIssue> issues;
  if (form.seats < 1 || form.seats > kMaxSeats) {
    issues.push_back({"seats", fmt::format("must be between 1 and {}", kMaxSeats)});
  }
  std::optional<NodeId> from;
  std::optional<NodeId> to;
  auto snap = [&](const GeoPoint& p, std::string_view field, std::optional<NodeId>& out) {
    if (!is_valid(p)) {
      issues.push_back({std::string(field), "coordinate out of range"});
      return;
    }
    try {
      out = geo::snap_to_graph(p, graph_, config_.snap_radius_m);
    } catch (const Error& e) {
      issues.push_back({std::string(field), fmt::format("{}: {}", to_string(e.code()), e.what())});
    }
  };
  snap(form.pickup, "pickup", from);
  snap(form.dropoff, "dropoff", to);
  if (is_valid(form.pickup) && form.pickup == form.dropoff) issues.push_back({"dropoff", "same as pickup"});
  if (!issues.empty()) throw Error(ErrorCode::InvalidRequest, "ride request failed validation", std::move(issues));

  geo::Route preview;
  try {
    preview = geo::shortest_route(graph_, *from, *to, config_.campus_speed_mps);
  } catch (const Error& e) {
    throw Error(ErrorCode::InvalidRequest, "ride request failed validation",
                std::vector<FieldIssue>{{"dropoff", fmt::format("{}: {}", to_string(e.code()), e.what())}});
  }

  std::scoped_lock lock(mu_);
  if (rider_busy_locked(caller.account_id)) {
    throw Error(ErrorCode::ActiveRequestExists, "rider already has an open request or an active ride");
  }
  RideRequest req;
  req.request_id = RequestId{fmt::format("req-{:06}", last_request_number_ + 1)};
  req.rider_id = caller.account_id;
  req.pickup = form.pickup;
  req.dropoff = form.dropoff;
  req.seats = form.seats;
  req.created_at = clock_.now();
  req.state = RequestState::Queued;

  RequestRecord rec{req, {}, {}, std::nullopt, std::nullopt, std::nullopt, 0};
  write_request_locked(rec);
  ++last_request_number_;
  const auto position = queue_.enqueue_request(req);
  requests_.emplace(req.request_id, std::move(rec));
  pending_by_rider_[req.rider_id] = req.request_id;

  dispatch_pending_locked();

  ConfirmResult out;
  out.request = requests_.at(req.request_id).request;
  out.position = position;
  out.distance_m = preview.distance_m;
  out.eta_s = geo::estimate_eta(preview, config_.campus_speed_mps);
  if (const auto& o = requests_.at(req.request_id).outcome) out.outcome = o->kind;
  return out;
}

Ride Service::accept_ride(const Session& caller, const RequestId& id) {
  const CarId car_id = require_driver(caller, "accept rides");
  std::scoped_lock lock(mu_);
  auto cit = fleet_.find(car_id);
  if (cit == fleet_.end()) throw Error(ErrorCode::UnknownCar, fmt::format("unknown car {}", car_id.str()));

  CarAgent car = cit->second;
  const RideId ride_id{fmt::format("ride-{:06}", last_ride_number_ + 1)};
  Ride ride;
  try {
    ride = queue_.claim_request(id, car, ride_id, clock_.now());
  } catch (const Error& e) {
    if (e.code() == ErrorCode::SeatMismatch) {
      if (auto res = queue_.resolution(id)) {
        resolve_locked(id, res->outcome, "no offered car has enough free seats");
      } else {
        sync_request_locked(id);
      }
    }
    throw;
  }
  ++last_ride_number_;

  RideRecord rec{ride, {}, 0, std::nullopt, 0};
  write_ride_locked(rec);
  write_car_locked(car);
  cit->second = car;
  requests_.at(id).ride_id = ride_id;
  sync_request_locked(id);

  const auto rider = ride.request.rider_id;
  pending_by_rider_.erase(rider);
  active_by_rider_[rider] = ride_id;
  active_by_car_[car_id] = ride_id;
  rides_.emplace(ride_id, std::move(rec));

  emit_locked(Address::account(rider), EventType::RideAccepted, ride_id,
              {{"request_id", id.str()}, {"ride_id", ride_id.str()}, {"car_id", car_id.str()},
               {"stage", to_string(ride.stage)}});
  spdlog::info("{} claimed {} as {}", car_id.str(), id.str(), ride_id.str());
  return ride;
}

RejectResult Service::reject_ride(const Session& caller, const RequestId& id) {
  const CarId car_id = require_driver(caller, "reject rides");
  std::scoped_lock lock(mu_);
  auto outcome = queue_.reject_request(id, car_id);
  if (outcome) {
    resolve_locked(id, *outcome, "every offered car declined");
    return {RequestState::Rejected, true};
  }
  sync_request_locked(id);
  return {requests_.at(id).request.state, false};
}

std::size_t Service::sweep_timeouts() {
  std::scoped_lock lock(mu_);
  const auto expired = queue_.expire_offers(clock_.now(), config_.offer_timeout);
  for (const auto& res : expired) resolve_locked(res.request_id, res.outcome, "offer timed out");
  if (!expired.empty()) dispatch_pending_locked();
  return expired.size();
}

// ------------------------------------------------------------------- rides

Ride Service::advance_ride(const Session& caller, const RideId& id, RideStage target) {
  std::scoped_lock lock(mu_);
  auto it = rides_.find(id);
  if (it == rides_.end()) throw Error(ErrorCode::UnknownRide, fmt::format("unknown ride {}", id.str()));
  RideRecord& rec = it->second;
  if (caller.role != Role::Driver || caller.car_id != rec.ride.car_id) {
    throw Error(ErrorCode::NotAssignedDriver, fmt::format("only the driver of {} sets its stage", id.str()));
  }

  const auto now = clock_.now();
  RideRecord staged = rec;
  staged.ride = advance_stage(rec.ride, Actor::Driver, target, now);

  std::optional<EventType> fresh;
  if (auto type = notice_for(target)) {
    if (staged.ride.stage != notice_stage(*type)) {
      throw Error(ErrorCode::WrongStage, fmt::format("{} only at {}", realtime::to_string(*type),
                                                     to_string(notice_stage(*type))));
    }
    const bool seen = std::any_of(staged.notices.begin(), staged.notices.end(),
                                  [&](const Notice& n) { return n.type == *type; });
    if (!seen) {
      staged.notices.push_back({*type, now});
      fresh = type;
    }
  }
  // The drop-off and the system's closing transition commit together.
  if (target == RideStage::EndRide) staged.ride = advance_stage(staged.ride, Actor::System, RideStage::Finished, now);

  write_ride_locked(staged);
  rec = std::move(staged);

  if (fresh) {
    emit_locked(Address::account(rec.ride.request.rider_id), *fresh, id,
                {{"ride_id", id.str()}, {"car_id", rec.ride.car_id.str()}, {"stage", to_string(target)}});
  }
  if (!rec.ride.active()) finish_ride_locked(rec);
  return rec.ride;
}

void Service::finish_ride_locked(RideRecord& rec) {
  rec.route.reset();
  active_by_rider_.erase(rec.ride.request.rider_id);
  active_by_car_.erase(rec.ride.car_id);
  if (auto it = fleet_.find(rec.ride.car_id); it != fleet_.end()) {
    auto& car = it->second;
    car.seats_available = std::min(car.capacity, car.seats_available + rec.ride.request.seats);
    car.available = true;
    write_car_locked(car);
  }
  spdlog::info("{} finished; {} is free", rec.ride.ride_id.str(), rec.ride.car_id.str());
  dispatch_pending_locked();
}

bool Service::publish_location(const Session& caller, GeoPoint point, TimePoint recorded_at) {
  const CarId car_id = require_driver(caller, "publish locations");
  if (!is_valid(point)) throw Error(ErrorCode::InvalidField, "coordinate out of range", "lat");
  std::scoped_lock lock(mu_);
  auto it = fleet_.find(car_id);
  if (it == fleet_.end()) throw Error(ErrorCode::UnknownCar, fmt::format("unknown car {}", car_id.str()));
  const bool kept = locations_.publish({car_id, point, recorded_at});
  if (kept) {
    it->second.position = point;
    it->second.position_updated_at = recorded_at;
  }
  return kept;
}

Service::RideRecord& Service::ride_for_participant_locked(const Session& caller, const RideId& id) {
  const auto& self = *this;
  return const_cast<RideRecord&>(self.ride_for_participant_locked(caller, id));
}

const Service::RideRecord& Service::ride_for_participant_locked(const Session& caller, const RideId& id) const {
  auto it = rides_.find(id);
  if (it == rides_.end()) throw Error(ErrorCode::UnknownRide, fmt::format("unknown ride {}", id.str()));
  const auto& ride = it->second.ride;
  const bool rider = caller.role == Role::Rider && caller.account_id == ride.request.rider_id;
  const bool driver = caller.role == Role::Driver && caller.car_id == ride.car_id;
  if (!rider && !driver) throw Error(ErrorCode::NotParticipant, fmt::format("not a participant of {}", id.str()));
  return it->second;
}

TrackView Service::track(const Session& caller, const RideId& id) {
  std::scoped_lock lock(mu_);
  RideRecord& rec = ride_for_participant_locked(caller, id);
  if (!rec.ride.active()) throw Error(ErrorCode::RideNotActive, fmt::format("ride {} is finished", id.str()));

  TrackView view;
  view.sample = locations_.latest(rec.ride.car_id);
  const auto& car = fleet_.at(rec.ride.car_id);
  view.car_position = view.sample ? view.sample->point : car.position;
  const bool to_pickup = rec.ride.pickup_status != LegStatus::Completed;
  view.target_leg = to_pickup ? "pickup" : "dropoff";
  view.target = to_pickup ? rec.ride.request.pickup : rec.ride.request.dropoff;

  auto compute = [&] {
    auto result = geo::fetch_external_route(router_.get(), graph_, view.car_position, view.target,
                                            config_.snap_radius_m, config_.campus_speed_mps);
    auto& route = result.route;
    if (!result.external) {
      // The graph route runs node to node; anchor it at the car and the pin.
      if (route.polyline.front() != view.car_position) {
        route.distance_m += geo::haversine_distance(view.car_position, route.polyline.front());
        route.polyline.insert(route.polyline.begin(), view.car_position);
      }
      if (route.polyline.back() != view.target) {
        route.distance_m += geo::haversine_distance(route.polyline.back(), view.target);
        route.polyline.push_back(view.target);
      }
      route.duration_s = route.distance_m / config_.campus_speed_mps;
    }
    rec.route = ActiveRoute{view.target, std::move(route), result.external};
  };

  if (rec.route && rec.route->target == view.target) {
    view.deviation_m = geo::deviation_from_route(view.car_position, rec.route->route);
    if (view.deviation_m > config_.reroute_threshold_m) {
      compute();
      view.rerouted = true;
      ++rec.reroutes;
      spdlog::info("{} rerouted: {:.1f} m off route", id.str(), view.deviation_m);
    }
  } else {
    compute();
    view.deviation_m = geo::deviation_from_route(view.car_position, rec.route->route);
  }
  view.ride = rec.ride;
  view.route = rec.route->route;
  view.route_external = rec.route->external;
  view.reroutes = rec.reroutes;
  return view;
}

RideView Service::ride(const Session& caller, const RideId& id) const {
  std::scoped_lock lock(mu_);
  if (caller.role == Role::Admin) {
    auto it = rides_.find(id);
    if (it == rides_.end()) throw Error(ErrorCode::UnknownRide, fmt::format("unknown ride {}", id.str()));
    return {it->second.ride, it->second.notices};
  }
  const auto& rec = ride_for_participant_locked(caller, id);
  return {rec.ride, rec.notices};
}

// ----------------------------------------------------------- introspection

std::vector<CarAgent> Service::fleet() const {
  std::scoped_lock lock(mu_);
  std::vector<CarAgent> out;
  for (const auto& [id, car] : fleet_) out.push_back(car);
  return out;
}

std::optional<Ride> Service::find_ride(const RideId& id) const {
  std::scoped_lock lock(mu_);
  if (auto it = rides_.find(id); it != rides_.end()) return it->second.ride;
  return std::nullopt;
}

std::vector<Ride> Service::rides() const {
  std::scoped_lock lock(mu_);
  std::vector<Ride> out;
  for (const auto& [id, rec] : rides_) out.push_back(rec.ride);
  return out;
}

// --------------------------------------------------------------- wire forms

json track_to_json(const TrackView& v) {
  json route{{"polyline", v.route.polyline},
             {"distance_m", v.route.distance_m},
             {"duration_s", v.route.duration_s},
             {"source", v.route_external ? "external" : "graph"}};
  json nodes = json::array();
  for (const auto& n : v.route.node_path) nodes.push_back(n.str());
  route["node_path"] = std::move(nodes);

  json out{{"ride_id", v.ride.ride_id.str()},
           {"stage", to_string(v.ride.stage)},
           {"statuses", {{"pickup", to_string(v.ride.pickup_status)}, {"dropoff", to_string(v.ride.dropoff_status)}}},
           {"car_position", v.car_position},
           {"target", v.target_leg},
           {"route", std::move(route)},
           {"rerouted", v.rerouted},
           {"deviation_m", v.deviation_m},
           {"reroutes", v.reroutes}};
  if (v.sample) {
    out["sample"] = {{"car_id", v.sample->car_id.str()},
                     {"lat", v.sample->point.lat},
                     {"lon", v.sample->point.lon},
                     {"recorded_at", to_millis(v.sample->recorded_at)}};
  } else {
    out["sample"] = nullptr;
  }
  return out;
}

json ride_to_json(const RideView& v) {
  json out = v.ride;
  json notices = json::array();
  for (const auto& n : v.notices) notices.push_back(notice_to_json(n));
  out["notifications"] = std::move(notices);
  return out;
}

}  // namespace campusride::service
