#include "campusride/domain/json.hpp"

#include "campusride/domain/error.hpp"

namespace campusride {

using nlohmann::json;

void to_json(json& j, const GeoPoint& p) { j = json{{"lat", p.lat}, {"lon", p.lon}}; }

void from_json(const json& j, GeoPoint& p) {
  p.lat = j.at("lat").get<double>();
  p.lon = j.at("lon").get<double>();
}

void to_json(json& j, const RideRequest& r) {
  j = json{{"request_id", r.request_id.str()},
           {"rider_id", r.rider_id.str()},
           {"pickup", r.pickup},
           {"dropoff", r.dropoff},
           {"seats", r.seats},
           {"created_at", to_millis(r.created_at)},
           {"state", to_string(r.state)}};
}

void from_json(const json& j, RideRequest& r) {
  r.request_id = RequestId{j.at("request_id").get<std::string>()};
  r.rider_id = AccountId{j.at("rider_id").get<std::string>()};
  r.pickup = j.at("pickup").get<GeoPoint>();
  r.dropoff = j.at("dropoff").get<GeoPoint>();
  r.seats = j.at("seats").get<int>();
  r.created_at = from_millis(j.at("created_at").get<std::int64_t>());
  r.state = parse_request_state(j.at("state").get<std::string>());
}

void to_json(json& j, const StageEntry& e) {
  j = json{{"stage", to_string(e.stage)}, {"at", to_millis(e.at)}};
}

void from_json(const json& j, StageEntry& e) {
  e.stage = parse_stage(j.at("stage").get<std::string>());
  e.at = from_millis(j.at("at").get<std::int64_t>());
}

void to_json(json& j, const Ride& r) {
  j = json{{"ride_id", r.ride_id.str()},
           {"request", r.request},
           {"car_id", r.car_id.str()},
           {"stage", to_string(r.stage)},
           {"pickup_status", to_string(r.pickup_status)},
           {"dropoff_status", to_string(r.dropoff_status)},
           {"history", r.history}};
}

void from_json(const json& j, Ride& r) {
  r.ride_id = RideId{j.at("ride_id").get<std::string>()};
  r.request = j.at("request").get<RideRequest>();
  r.car_id = CarId{j.at("car_id").get<std::string>()};
  r.stage = parse_stage(j.at("stage").get<std::string>());
  r.pickup_status = parse_leg_status(j.at("pickup_status").get<std::string>());
  r.dropoff_status = parse_leg_status(j.at("dropoff_status").get<std::string>());
  r.history = j.at("history").get<std::vector<StageEntry>>();
}

void to_json(json& j, const CarAgent& c) {
  j = json{{"car_id", c.car_id.str()},
           {"capacity", c.capacity},
           {"seats_available", c.seats_available},
           {"available", c.available},
           {"position", c.position},
           {"position_updated_at", to_millis(c.position_updated_at)}};
}

void from_json(const json& j, CarAgent& c) {
  c.car_id = CarId{j.at("car_id").get<std::string>()};
  c.capacity = j.at("capacity").get<int>();
  c.seats_available = j.at("seats_available").get<int>();
  c.available = j.at("available").get<bool>();
  c.position = j.at("position").get<GeoPoint>();
  c.position_updated_at = from_millis(j.at("position_updated_at").get<std::int64_t>());
}

void to_json(json& j, const UserAccount& a) {
  j = json{{"account_id", a.account_id.str()},
           {"university_id", a.university_id},
           {"email", a.email},
           {"first_name", a.first_name},
           {"last_name", a.last_name},
           {"phone", a.phone},
           {"username", a.username},
           {"password_digest", a.password_digest},
           {"approval", to_string(a.approval)},
           {"role", to_string(a.role)}};
  if (a.car_id) j["car_id"] = a.car_id->str();
}

void from_json(const json& j, UserAccount& a) {
  a.account_id = AccountId{j.at("account_id").get<std::string>()};
  a.university_id = j.at("university_id").get<std::string>();
  a.email = j.at("email").get<std::string>();
  a.first_name = j.at("first_name").get<std::string>();
  a.last_name = j.at("last_name").get<std::string>();
  a.phone = j.at("phone").get<std::string>();
  a.username = j.at("username").get<std::string>();
  a.password_digest = j.at("password_digest").get<std::string>();
  a.approval = parse_approval(j.at("approval").get<std::string>());
  a.role = parse_role(j.at("role").get<std::string>());
  if (auto it = j.find("car_id"); it != j.end()) {
    a.car_id = CarId{it->get<std::string>()};
  } else {
    a.car_id.reset();
  }
}

}  // namespace campusride
