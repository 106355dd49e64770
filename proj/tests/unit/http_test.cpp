#include <doctest.h>

#include <chrono>
#include <map>
#include <random>
#include <set>
#include <thread>

#include <fmt/format.h>

#include "campusride/domain/error.hpp"
#include "campusride/domain/json.hpp"
#include "campusride/service/host.hpp"
#include "campusride/sim/clients.hpp"
#include "../support/fixtures.hpp"

using namespace campusride;
using nlohmann::json;
using sim::ApiClient;
using sim::HttpResult;
using sim::RealtimeClient;

namespace {

struct HttpRig {
  HttpRig() : graph(testing::small_grid()) {
    config.http_port = 0;
    config.realtime_port = 0;
    config.fast_password_hashing = true;
    config.background_sweep = false;
    host = std::make_unique<service::ServiceHost>(config, store, graph, clock);
    host->start();
    api = std::make_unique<ApiClient>("127.0.0.1", host->http_port());
    (void)host->service().bootstrap_admin("ops", "ops-secret");
    admin = login("ops", "ops-secret");
  }
  ~HttpRig() { host->stop(); }

  std::string login(const std::string& user, const std::string& password) {
    const auto r = api->post("/login", {{"username", user}, {"password", password}});
    REQUIRE(r.status == 200);
    return r.body.at("token").get<std::string>();
  }

  /// Provisions and logs in a car. Offers only reach cars with a live
  /// realtime connection, so one is opened unless `online` is false.
  std::string car(const std::string& id, int capacity = 4, bool online = true) {
    (void)host->service().provision_car(CarId{id}, capacity, id + "-secret");
    auto token = login(id, id + "-secret");
    if (online) {
      const auto before = host->gateway().connection_count();
      auto rt = std::make_unique<RealtimeClient>("127.0.0.1", host->realtime_port());
      (void)rt->authenticate(token);
      while (host->gateway().connection_count() == before) std::this_thread::sleep_for(std::chrono::milliseconds{1});
      sessions.push_back(std::move(rt));
    }
    return token;
  }

  /// Registers, approves and logs in a rider; returns {token, account_id}.
  std::pair<std::string, std::string> rider(const std::string& first, const std::string& last) {
    ++riders;
    const json body{{"university_id", fmt::format("U{:05}", riders)},
                    {"email", fmt::format("r{}@campus.example", riders)},
                    {"first_name", first},
                    {"last_name", last},
                    {"phone", "0100"},
                    {"password", "rider-secret"}};
    const auto reg = api->post("/register", body);
    REQUIRE(reg.status == 201);
    const auto id = reg.body.at("account_id").get<std::string>();
    REQUIRE(api->post("/admin/review", {{"account_id", id}, {"decision", "accept"}}, admin).status == 200);
    return {login(reg.body.at("username").get<std::string>(), "rider-secret"), id};
  }

  json ride_body(const char* from, const char* to, int seats = 1) const {
    return {{"pickup", graph.position(NodeId{from})}, {"dropoff", graph.position(NodeId{to})}, {"seats", seats}};
  }

  service::ServiceConfig config;
  std::shared_ptr<store::DocumentStore> store = store::open_store("memory");
  geo::RoadGraph graph;
  ManualClock clock;
  std::unique_ptr<service::ServiceHost> host;
  std::unique_ptr<ApiClient> api;
  std::string admin;
  std::vector<std::unique_ptr<RealtimeClient>> sessions;
  int riders{0};
};

}  // namespace

TEST_CASE("health and structured errors") {
  HttpRig rig;
  CHECK(rig.api->get("/health").status == 200);
  const auto bad = rig.api->post("/login", {{"username", "nobody"}, {"password", "x"}});
  CHECK(bad.status == 401);
  CHECK(bad.body.at("code") == "InvalidCredentials");
  CHECK(bad.body.contains("message"));

  const auto seats = rig.api->post("/confirm-ride", rig.ride_body("g0", "g8", 0), rig.rider("John", "Doe").first);
  CHECK(seats.status == 422);
  CHECK(seats.body.at("code") == "InvalidRequest");
  CHECK(seats.body.at("errors").at(0).at("field") == "seats");
}

TEST_CASE("registration flow over http") {
  HttpRig rig;
  const json body{{"university_id", "U1"}, {"email", "john@campus.example"}, {"first_name", "John"},
                  {"last_name", "Doe"},    {"phone", "0100"},                {"password", "abc123"}};
  const auto reg = rig.api->post("/register", body);
  CHECK(reg.status == 201);
  CHECK(reg.body.at("approval") == "pending");
  CHECK(reg.body.at("username") == "john.doe");
  CHECK(rig.api->post("/register", body).status == 409);
  auto weak = body;
  weak["university_id"] = "U2";
  weak["email"] = "x@campus.example";
  weak["password"] = "abc12";
  CHECK(rig.api->post("/register", weak).status == 422);

  const auto early = rig.api->post("/login", {{"username", "john.doe"}, {"password", "abc123"}});
  CHECK(early.status == 403);
  CHECK(early.body.at("code") == "NotYetApproved");

  const auto pending = rig.api->get("/admin/pending", rig.admin);
  REQUIRE(pending.status == 200);
  REQUIRE(pending.body.at("accounts").size() == 1);
  const auto id = pending.body["accounts"][0].at("account_id").get<std::string>();
  CHECK(pending.body["accounts"][0].dump().find("password") == std::string::npos);

  CHECK(rig.api->post("/admin/review", {{"account_id", id}, {"decision", "accept"}}, rig.admin).status == 200);
  CHECK(rig.host->service().outbox().size() == 1);
  CHECK(rig.api->post("/admin/review", {{"account_id", id}, {"decision", "reject"}}, rig.admin).status == 409);
  const auto ok = rig.api->post("/login", {{"username", "john.doe"}, {"password", "abc123"}});
  CHECK(ok.status == 200);
  CHECK(ok.body.at("role") == "rider");
}

TEST_CASE("authorization matrix") {
  HttpRig rig;
  const auto [rider, rider_id] = rig.rider("John", "Doe");
  const auto driver = rig.car("car-1");
  const auto confirm = rig.api->post("/confirm-ride", rig.ride_body("g0", "g8"), rider);
  REQUIRE(confirm.status == 200);
  const auto accept =
      rig.api->post("/accept-ride", {{"request_id", confirm.body.at("request_id")}}, driver);
  REQUIRE(accept.status == 200);
  const auto ride = accept.body.at("ride_id").get<std::string>();

  struct Endpoint {
    std::string method;
    std::string path;
    json body;
    // Expected status for: no token, rider, driver, admin.
    std::array<int, 4> expect;
  };
  const std::vector<Endpoint> endpoints{
      {"POST", "/confirm-ride", rig.ride_body("g1", "g7"), {401, 409, 403, 403}},
      {"POST", "/accept-ride", {{"request_id", "req-999999"}}, {401, 403, 404, 403}},
      {"POST", "/reject-ride", {{"request_id", "req-999999"}}, {401, 403, 404, 403}},
      {"POST", "/rides/" + ride + "/stage", {{"target_stage", "start_journey"}}, {401, 403, 409, 403}},
      {"POST", "/location", {{"lat", 29.99}, {"lon", 31.45}}, {401, 403, 200, 403}},
      {"GET", "/rides/" + ride + "/track", json(), {401, 200, 200, 403}},
      {"GET", "/rides/" + ride, json(), {401, 200, 200, 200}},
      {"GET", "/admin/pending", json(), {401, 403, 403, 200}},
      {"POST", "/admin/review", {{"account_id", "acct-999999"}, {"decision", "accept"}}, {401, 403, 403, 404}},
  };
  const std::array<std::string, 4> tokens{"", rider, driver, rig.admin};
  const std::array<const char*, 4> roles{"none", "rider", "driver", "admin"};
  for (const auto& ep : endpoints) {
    for (std::size_t r = 0; r < tokens.size(); ++r) {
      CAPTURE(ep.path);
      CAPTURE(roles[r]);
      const auto res = ep.method == "GET" ? rig.api->get(ep.path, tokens[r]) : rig.api->post(ep.path, ep.body, tokens[r]);
      CHECK(res.status == ep.expect[r]);
    }
    const auto forged = ep.method == "GET" ? rig.api->get(ep.path, "forged") : rig.api->post(ep.path, ep.body, "forged");
    CHECK(forged.status == 401);
  }
}

TEST_CASE("ride endpoints") {
  HttpRig rig;
  const auto small = rig.car("car-a", 1);
  const auto big = rig.car("car-b", 4);
  const auto [rider, rider_id] = rig.rider("John", "Doe");

  SUBCASE("seat mismatch then decline resolves as rejected") {
    const auto c = rig.api->post("/confirm-ride", rig.ride_body("g0", "g8", 2), rider);
    REQUIRE(c.status == 200);
    CHECK(c.body.at("status") == "queued");
    const auto id = c.body.at("request_id");
    CHECK(rig.api->post("/confirm-ride", rig.ride_body("g0", "g8", 1), rider).status == 409);
    CHECK(rig.api->post("/accept-ride", {{"request_id", id}}, small).status == 422);
    const auto rej = rig.api->post("/reject-ride", {{"request_id", id}}, big);
    CHECK(rej.status == 200);
    CHECK(rej.body.at("terminal") == true);
    CHECK(rig.api->post("/reject-ride", {{"request_id", id}}, big).status == 409);
  }
  SUBCASE("stage rules and tracking") {
    const auto c = rig.api->post("/confirm-ride", rig.ride_body("g4", "g8", 1), rider);
    const auto a = rig.api->post("/accept-ride", {{"request_id", c.body.at("request_id")}}, big);
    REQUIRE(a.status == 200);
    CHECK(a.body.at("stage") == "start_journey");
    CHECK(rig.api->post("/accept-ride", {{"request_id", c.body.at("request_id")}}, small).status == 409);
    const auto ride = a.body.at("ride_id").get<std::string>();
    const auto stage = "/rides/" + ride + "/stage";
    CHECK(rig.api->post(stage, {{"target_stage", "end_ride"}}, big).status == 409);
    CHECK(rig.api->post(stage, {{"target_stage", "end_ride"}}, rider).status == 403);
    CHECK(rig.api->post(stage, {{"target_stage", "warp"}}, big).status == 422);
    CHECK(rig.api->post(stage, {{"target_stage", "head_to_pickup"}}, big).status == 200);

    rig.clock.advance(Millis{1000});
    const auto loc = rig.api->post("/location", {{"lat", 29.99}, {"lon", 31.45}}, big);
    CHECK(loc.status == 200);
    CHECK(loc.body.at("stored") == true);
    const auto track = rig.api->get("/rides/" + ride + "/track", rider);
    REQUIRE(track.status == 200);
    CHECK(track.body.at("sample").at("lat") == 29.99);
    CHECK(track.body.at("target") == "pickup");
    CHECK(track.body.at("statuses").at("pickup") == "enroute");

    for (const auto* s : {"i_have_arrived", "start_ride", "end_ride"}) {
      CHECK(rig.api->post(stage, {{"target_stage", s}}, big).status == 200);
    }
    CHECK(rig.api->get("/rides/" + ride + "/track", rider).status == 410);
    const auto view = rig.api->get("/rides/" + ride, rider);
    CHECK(view.body.at("stage") == "finished");
    CHECK(view.body.at("notifications").size() == 2);
  }
  SUBCASE("malformed bodies") {
    CHECK(rig.api->post("/confirm-ride", json("not an object"), rider).status == 400);
    // Well-formed JSON with bad fields is a validation error naming the field.
    const auto missing = rig.api->post("/accept-ride", json::object(), big);
    CHECK(missing.status == 422);
    CHECK(missing.body.at("errors").at(0).at("field") == "request_id");
    const auto lat = rig.api->post("/location", {{"lat", "north"}, {"lon", 31.45}}, big);
    CHECK(lat.status == 422);
    CHECK(lat.body.at("errors").at(0).at("field") == "lat");
    CHECK(rig.api->get("/rides/ride-424242", rider).status == 404);
  }
}

TEST_CASE("arbitrary bodies never break invariants") {
  HttpRig rig;
  const std::vector<std::string> drivers{rig.car("car-a", 2), rig.car("car-b", 4)};
  std::vector<std::string> riders;
  for (int i = 0; i < 3; ++i) riders.push_back(rig.rider(fmt::format("F{}", i), "Z").first);
  std::mt19937_64 rng(77);

  auto random_value = [&](int depth, auto& self) -> json {
    switch (rng() % (depth > 2 ? 6 : 8)) {
      case 0: return nullptr;
      case 1: return rng() % 2 == 0;
      case 2: return static_cast<std::int64_t>(rng() % 20) - 5;
      case 3: return static_cast<double>(rng() % 20000) / 100.0 - 50.0;
      case 4: return std::string(rng() % 6, static_cast<char>('a' + rng() % 26));
      case 5: return fmt::format("req-{:06}", rng() % 5);
      case 6: {
        json a = json::array();
        for (std::size_t i = 0, n = rng() % 3; i < n; ++i) a.push_back(self(depth + 1, self));
        return a;
      }
      default: {
        static const std::vector<std::string> keys{"pickup", "dropoff", "seats",       "request_id", "lat",
                                                    "lon",    "target_stage", "recorded_at", "x"};
        json o = json::object();
        for (std::size_t i = 0, n = rng() % 5; i < n; ++i) o[keys[rng() % keys.size()]] = self(depth + 1, self);
        return o;
      }
    }
  };
  const std::vector<std::string> paths{"/confirm-ride", "/accept-ride", "/reject-ride", "/location",
                                       "/rides/ride-000001/stage", "/rides/ride-000002/stage"};
  int server_errors = 0;
  int i = 0;
  for (; i < 600; ++i) {
    const auto& path = paths[rng() % paths.size()];
    json body = random_value(0, random_value);
    // Mix in well-formed requests so that rides actually exist.
    if (rng() % 3 == 0 && path == "/confirm-ride") body = rig.ride_body("g0", "g8", 1 + static_cast<int>(rng() % 4));
    if (rng() % 3 == 0 && (path == "/accept-ride" || path == "/reject-ride")) {
      body = {{"request_id", fmt::format("req-{:06}", 1 + rng() % 6)}};
    }
    if (path.find("/stage") != std::string::npos && rng() % 2) {
      static const std::vector<std::string> stages{"head_to_pickup", "i_have_arrived", "start_ride", "end_ride"};
      body = {{"target_stage", stages[rng() % stages.size()]}};
    }
    const auto& token = rng() % 2 ? drivers[rng() % drivers.size()] : riders[rng() % riders.size()];
    const auto res = rig.api->post(path, body, token);
    if (res.status >= 500) {
      ++server_errors;
      MESSAGE(fmt::format("{} {} -> {} {}", path, body.dump(), res.status, res.body.dump()));
    }
  }
  CHECK(server_errors == 0);
  std::map<CarId, int> held;
  std::set<RequestId> seen;
  for (const auto& r : rig.host->service().rides()) {
    CHECK(seen.insert(r.request.request_id).second);
    if (r.active()) held[r.car_id] += r.request.seats;
  }
  for (const auto& car : rig.host->service().fleet()) CHECK(held[car.car_id] + car.seats_available == car.capacity);
}

TEST_CASE("realtime gateway") {
  HttpRig rig;
  const auto driver = rig.car("car-1", 4, false);
  const auto [rider, rider_id] = rig.rider("John", "Doe");

  RealtimeClient bad("127.0.0.1", rig.host->realtime_port());
  CHECK_THROWS_AS((void)bad.authenticate("forged"), Error);

  RealtimeClient car_rt("127.0.0.1", rig.host->realtime_port());
  CHECK(car_rt.authenticate(driver) == "car:car-1");
  RealtimeClient rider_rt("127.0.0.1", rig.host->realtime_port());
  CHECK(rider_rt.authenticate(rider) == "account:" + rider_id);
  (void)car_rt.sync();
  (void)rider_rt.sync();

  const auto c = rig.api->post("/confirm-ride", rig.ride_body("g0", "g8"), rider);
  const auto offer = car_rt.next_event();
  CHECK(offer.type == realtime::EventType::RideRequest);
  CHECK(offer.payload.at("request_id") == c.body.at("request_id"));
  const auto a = rig.api->post("/accept-ride", {{"request_id", c.body.at("request_id")}}, driver);
  const auto ride = a.body.at("ride_id").get<std::string>();
  const auto accepted = rider_rt.next_event();
  CHECK(accepted.type == realtime::EventType::RideAccepted);
  CHECK(accepted.ride_id == RideId{ride});
  for (const auto* s : {"head_to_pickup", "i_have_arrived"}) {
    REQUIRE(rig.api->post("/rides/" + ride + "/stage", {{"target_stage", s}}, driver).status == 200);
  }
  const auto arrived = rider_rt.next_event();
  CHECK(arrived.type == realtime::EventType::DriverArrived);
  CHECK(arrived.seq > accepted.seq);

  // Drivers may publish locations over the socket; seq must increase.
  realtime::EventEnvelope up;
  up.type = realtime::EventType::LocationUpdate;
  up.payload = {{"lat", 29.9901}, {"lon", 31.4501}, {"recorded_at", to_millis(rig.clock.now()) + 5}};
  car_rt.send(up, 1);
  (void)car_rt.sync();
  const auto track = rig.api->get("/rides/" + ride + "/track", rider);
  CHECK(track.body.at("sample").at("lat") == 29.9901);

  // Frames up to the sync acknowledgement, in arrival order.
  auto frames_until_synced = [](RealtimeClient& rt, int n) {
    rt.send_raw(fmt::format(R"({{"sync":{}}})", n));
    std::vector<nlohmann::json> out;
    for (;;) {
      auto f = rt.next_frame();
      if (f.contains("synced")) return out;
      out.push_back(std::move(f));
    }
  };
  car_rt.send(up, 1);
  auto frames = frames_until_synced(car_rt, 99);
  REQUIRE(frames.size() == 1);
  CHECK(frames[0].at("error") == "MalformedFrame");

  realtime::EventEnvelope forged;
  forged.type = realtime::EventType::RideEnded;
  rider_rt.send(forged);
  frames = frames_until_synced(rider_rt, 5);
  REQUIRE(frames.size() == 1);
  CHECK(frames[0].contains("error"));
}
