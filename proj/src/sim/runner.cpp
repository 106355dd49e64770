#include "campusride/sim/runner.hpp"

#include <algorithm>
#include <atomic>
#include <filesystem>
#include <chrono>
#include <deque>
#include <map>
#include <memory>
#include <random>
#include <thread>

#include <unistd.h>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "campusride/domain/json.hpp"
#include "campusride/geo/haversine.hpp"
#include "campusride/service/host.hpp"
#include "campusride/sim/clients.hpp"
#include "campusride/store/document_store.hpp"

namespace campusride::sim {

using nlohmann::json;
using Kind = ActorDecl::Kind;

namespace {

constexpr double kDefaultArrivalRadiusM = 5.0;
// Replaced in a store spec by a scratch directory private to the run.
constexpr std::string_view kTmpToken = "{tmp}";

struct StepFailed {
  std::string message;
};

struct Actor {
  const ActorDecl* decl{nullptr};
  std::string username;
  std::string token;
  std::string account_id;
  std::string address;
  std::unique_ptr<RealtimeClient> rt;
  std::uint64_t received{0};

  // Rider
  std::string request_id;
  std::string ride_id;

  // Car
  std::deque<json> offers;
  std::string active_ride;
  std::string last_ride;
  GeoPoint position;
};

double parse_double(const std::string& text, const std::string& what) {
  char* end = nullptr;
  const double v = std::strtod(text.c_str(), &end);
  if (text.empty() || end != text.c_str() + text.size()) {
    throw Error(ErrorCode::ScenarioInvalid, fmt::format("{}: cannot parse '{}'", what, text));
  }
  return v;
}

class Runner {
 public:
  Runner(const Scenario& s, const RunOptions& o) : scenario_(s), options_(o), rng_(o.seed) {}

  RunResult run() {
    const auto wall_start = std::chrono::steady_clock::now();
    RunResult result;
    result.scenario = scenario_.name;
    result.seed = options_.seed;

    configure();
    start_service();
    provision();
    try {
      execute(scenario_.steps);
    } catch (const StepFailed& f) {
      failures_.push_back(f.message);
    }
    if (failures_.empty()) check_assertions();
    shutdown();

    result.transcript = std::move(transcript_);
    result.failures = std::move(failures_);
    result.metrics = metrics(result.transcript);
    result.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - wall_start).count();
    return result;
  }

 private:
  // ------------------------------------------------------------ setup

  void configure() {
    try {
      graph_ = geo::RoadGraph::load(scenario_.graph);
    } catch (const Error& e) {
      throw Error(ErrorCode::ScenarioInvalid, fmt::format("graph {}: {}", scenario_.graph.string(), e.what()));
    }
    config_.bind_host = "127.0.0.1";
    config_.http_port = 0;
    config_.realtime_port = 0;
    config_.fast_password_hashing = true;
    config_.background_sweep = false;
    auto num = [&](const char* key, double fallback) {
      return parse_double(scenario_.setting(key, fmt::format("{}", fallback)), key);
    };
    config_.offer_timeout = Millis{static_cast<long long>(num("offer_timeout_ms", 30000))};
    config_.reroute_threshold_m = num("reroute_threshold_m", config_.reroute_threshold_m);
    config_.campus_speed_mps = num("campus_speed_mps", config_.campus_speed_mps);
    config_.snap_radius_m = num("snap_radius_m", config_.snap_radius_m);
    config_.track_publish = Millis{static_cast<long long>(num("track_publish_ms", 1000))};
    config_.track_poll = Millis{static_cast<long long>(num("track_poll_ms", 2000))};
    step_ = Millis{static_cast<long long>(num("step_ms", 1000))};
    if (config_.track_publish.count() <= 0 || config_.track_poll.count() <= 0 || step_.count() < 0) {
      throw Error(ErrorCode::ScenarioInvalid, "cadences must be positive");
    }
    config_.store = scenario_.setting("store", options_.store);
    if (auto at = config_.store.find(kTmpToken); at != std::string::npos) {
      static std::atomic<unsigned> counter{0};
      scratch_ = std::filesystem::temp_directory_path() /
                 fmt::format("campusride-sim-{}-{}", ::getpid(), counter.fetch_add(1));
      std::filesystem::remove_all(scratch_);
      std::filesystem::create_directories(scratch_);
      config_.store.replace(at, kTmpToken.size(), scratch_.string());
    }
    store_ = store::open_store(config_.store);
    start_ms_ = to_millis(clock_.now());
  }

  void start_service() {
    host_ = std::make_unique<service::ServiceHost>(config_, store_, graph_, clock_);
    host_->start();
    api_ = std::make_unique<ApiClient>("127.0.0.1", host_->http_port());
  }

  void provision() {
    for (const auto& decl : scenario_.actors) {
      Actor a;
      a.decl = &decl;
      if (decl.kind == Kind::Admin) {
        host_->service().bootstrap_admin(decl.name, decl.password);
        a.username = decl.name;
        note("setup", fmt::format("admin {} provisioned", decl.name));
      } else if (decl.kind == Kind::Car) {
        const auto node = decl.start_node.empty() ? graph_.id_at(0) : NodeId{decl.start_node};
        a.position = node_position(node.str());
        host_->service().provision_car(CarId{decl.name}, decl.capacity, decl.password, a.position);
        a.username = decl.name;
        note("setup", fmt::format("car {} provisioned with {} seats at {}", decl.name, decl.capacity, node.str()));
      }
      actors_.emplace(decl.name, std::move(a));
    }
  }

  void shutdown() {
    for (auto& [name, a] : actors_) {
      if (a.rt) a.rt->close();
    }
    api_.reset();
    if (host_) host_->stop();
    host_.reset();
    store_.reset();
    if (!scratch_.empty()) {
      std::error_code ec;
      std::filesystem::remove_all(scratch_, ec);
    }
  }

  // ----------------------------------------------------------- helpers

  [[nodiscard]] std::int64_t now_ms() const { return to_millis(clock_.now()) - start_ms_; }

  void note(const std::string& actor, std::string text) { transcript_.note(now_ms(), actor, std::move(text)); }

  GeoPoint node_position(const std::string& id) const {
    if (!graph_.contains(NodeId{id})) {
      throw Error(ErrorCode::ScenarioInvalid, fmt::format("graph has no node '{}'", id));
    }
    return graph_.position(NodeId{id});
  }

  GeoPoint point_of(const std::string& spec) const {
    if (auto comma = spec.find(','); comma != std::string::npos) {
      return {parse_double(spec.substr(0, comma), "lat"), parse_double(spec.substr(comma + 1), "lon")};
    }
    return node_position(spec);
  }

  std::uint64_t draw(std::uint64_t bound) { return rng_() % bound; }

  template <class T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[draw(i)]);
  }

  Actor& actor(const std::string& name) { return actors_.at(name); }

  std::vector<std::string> riders() const {
    std::vector<std::string> out;
    for (const auto& d : scenario_.actors) {
      if (d.kind == Kind::Rider) out.push_back(d.name);
    }
    return out;
  }

  Actor& admin() {
    for (const auto& d : scenario_.actors) {
      if (d.kind == Kind::Admin) {
        auto& a = actor(d.name);
        if (a.token.empty()) login(a, d.password, std::nullopt, current_line_);
        return a;
      }
    }
    throw Error(ErrorCode::ScenarioInvalid, "scenario declares no admin");
  }

  [[noreturn]] void fail(std::size_t line, const std::string& what) {
    const auto excerpt = transcript_.size() == 0 ? std::string{} : transcript_.excerpt(transcript_.size() - 1);
    throw StepFailed{fmt::format("line {}: {}\n{}", line, what, excerpt)};
  }

  HttpResult call(Actor& a, const std::string& method, const std::string& path, const json& body,
                  std::optional<int> expect, std::size_t line) {
    HttpResult r;
    try {
      r = method == "GET" ? api_->get(path, a.token) : api_->post(path, body, a.token);
    } catch (const Error& e) {
      fail(line, fmt::format("{} {}: {}", method, path, e.what()));
    }
    transcript_.http(now_ms(), a.decl->name, method, path, method == "GET" ? json() : body, r.status, r.body);
    const bool ok = expect ? r.status == *expect : (r.status >= 200 && r.status < 300);
    if (!ok) {
      fail(line, fmt::format("{} {} returned {}{}", method, path, r.status,
                             expect ? fmt::format(", expected {}", *expect) : std::string{}));
    }
    return r;
  }

  /// One scripted user action: think time, then the call.
  HttpResult act(Actor& a, const std::string& method, const std::string& path, const json& body,
                 std::optional<int> expect, std::size_t line) {
    advance(step_);
    return call(a, method, path, body, expect, line);
  }

  void advance(Millis by) {
    if (by.count() == 0) return;
    clock_.advance(by);
    host_->service().sweep_timeouts();
  }

  void drain() {
    for (const auto& d : scenario_.actors) {
      auto& a = actor(d.name);
      if (!a.rt) continue;
      const auto target = host_->gateway().sent_to(realtime::Address::parse(a.address));
      while (a.received < target) {
        realtime::EventEnvelope e;
        try {
          e = a.rt->next_event();
        } catch (const Error& err) {
          fail(current_line_, fmt::format("realtime read for {}: {}", d.name, err.what()));
        }
        ++a.received;
        on_event(a, e);
        transcript_.event(now_ms(), d.name, std::move(e));
      }
    }
  }

  void on_event(Actor& a, const realtime::EventEnvelope& e) {
    const auto& p = e.payload;
    switch (e.type) {
      case realtime::EventType::RideRequest: a.offers.push_back(p); break;
      case realtime::EventType::RideAccepted:
        a.ride_id = p.value("ride_id", std::string{});
        a.request_id.clear();
        break;
      case realtime::EventType::RideRejected:
      case realtime::EventType::NoCarsAvailable: a.request_id.clear(); break;
      default: break;
    }
  }

  void connect(Actor& a, std::size_t line) {
    try {
      a.rt = std::make_unique<RealtimeClient>("127.0.0.1", host_->realtime_port());
      a.address = a.rt->authenticate(a.token);
    } catch (const Error& e) {
      a.rt.reset();
      fail(line, fmt::format("realtime connect for {}: {}", a.decl->name, e.what()));
    }
    // Wait for the gateway to register the session before anything is sent.
    const auto addr = realtime::Address::parse(a.address);
    for (int i = 0; i < 2000 && host_->gateway().connection_count(addr) == 0; ++i) {
      std::this_thread::sleep_for(std::chrono::milliseconds{1});
    }
    a.received = host_->gateway().sent_to(addr);
    note(a.decl->name, fmt::format("realtime connected as {}", a.address));
  }

  void disconnect(Actor& a) {
    if (!a.rt) return;
    a.rt->close();
    a.rt.reset();
    const auto addr = realtime::Address::parse(a.address);
    for (int i = 0; i < 2000 && host_->gateway().connection_count(addr) > 0; ++i) {
      std::this_thread::sleep_for(std::chrono::milliseconds{1});
    }
    note(a.decl->name, "realtime disconnected");
  }

  void login(Actor& a, const std::string& password, std::optional<int> expect, std::size_t line) {
    auto r = act(a, "POST", "/login", {{"username", a.username}, {"password", password}}, expect, line);
    if (r.status != 200) return;
    a.token = r.body.at("token").get<std::string>();
    a.account_id = r.body.at("account_id").get<std::string>();
    if (a.rt) disconnect(a);
    connect(a, line);
  }

  void register_rider(Actor& a, std::optional<int> expect, std::size_t line) {
    const auto& d = *a.decl;
    json body{{"university_id", d.university_id}, {"email", d.email}, {"first_name", d.first_name},
              {"last_name", d.last_name},         {"phone", d.phone}, {"password", d.password}};
    auto r = act(a, "POST", "/register", body, expect, line);
    if (r.status == 201) {
      a.account_id = r.body.at("account_id").get<std::string>();
      a.username = r.body.at("username").get<std::string>();
    }
  }

  void review(Actor& rider, const std::string& decision, std::optional<int> expect, std::size_t line) {
    if (rider.account_id.empty()) fail(line, fmt::format("{} has not registered", rider.decl->name));
    auto& adm = admin();
    act(adm, "POST", "/admin/review", {{"account_id", rider.account_id}, {"decision", decision}}, expect, line);
  }

  std::string ride_of(const Actor& a) const { return a.decl->kind == Kind::Car ? a.active_ride : a.ride_id; }

  Actor* rider_of_ride(const std::string& ride) {
    for (const auto& d : scenario_.actors) {
      auto& a = actor(d.name);
      if (d.kind == Kind::Rider && !ride.empty() && a.ride_id == ride) return &a;
    }
    return nullptr;
  }

  HttpResult track(Actor& a, std::optional<int> expect, std::size_t line) {
    const auto ride = !ride_of(a).empty() ? ride_of(a) : a.last_ride;
    if (ride.empty()) fail(line, fmt::format("{} has no ride to track", a.decl->name));
    return call(a, "GET", fmt::format("/rides/{}/track", ride), json(), expect, line);
  }

  void publish(Actor& car, const GeoPoint& p, std::int64_t offset_ms, std::optional<int> expect, std::size_t line) {
    json body{{"lat", p.lat}, {"lon", p.lon}, {"recorded_at", to_millis(clock_.now()) + offset_ms}};
    auto r = call(car, "POST", "/location", body, expect, line);
    if (r.status == 200 && r.body.value("stored", false)) car.position = p;
  }

  /// Moves the car along `path` at campus speed, publishing every
  /// track_publish_ms; the ride's rider polls every track_poll_ms.
  void drive(Actor& car, const std::vector<GeoPoint>& path, std::size_t line) {
    std::vector<double> cumulative{0.0};
    for (std::size_t i = 1; i < path.size(); ++i) {
      cumulative.push_back(cumulative.back() + geo::haversine_distance(path[i - 1], path[i]));
    }
    const double total = cumulative.back();
    const double step_m = config_.campus_speed_mps * static_cast<double>(config_.track_publish.count()) / 1000.0;
    Actor* rider = rider_of_ride(car.active_ride);
    Millis since_poll{0};
    double travelled = 0;
    bool polled_at_end = false;
    while (travelled < total) {
      travelled = std::min(total, travelled + step_m);
      auto seg = std::upper_bound(cumulative.begin(), cumulative.end(), travelled) - cumulative.begin();
      seg = std::clamp<long>(seg, 1, static_cast<long>(path.size()) - 1);
      const double len = cumulative[seg] - cumulative[seg - 1];
      const double f = len > 0 ? (travelled - cumulative[seg - 1]) / len : 1.0;
      const GeoPoint p = travelled >= total ? path.back() : geo::interpolate(path[seg - 1], path[seg], f);

      advance(config_.track_publish);
      publish(car, p, 0, std::nullopt, line);
      since_poll += config_.track_publish;
      polled_at_end = false;
      if (rider != nullptr && since_poll >= config_.track_poll) {
        track(*rider, std::nullopt, line);
        since_poll = Millis{0};
        polled_at_end = true;
      }
      drain();
    }
    if (rider != nullptr && !polled_at_end) {
      track(*rider, std::nullopt, line);
      drain();
    }
  }

  // ----------------------------------------------------------- steps

  void execute(const std::vector<Step>& steps) {
    for (const auto& s : steps) {
      current_line_ = s.line;
      if (s.verb == "repeat") {
        for (int i = 0; i < s.repeat; ++i) execute(s.body);
        continue;
      }
      step(s);
      drain();
    }
  }

  void step(const Step& s) {
    const auto& v = s.verb;
    const auto line = s.line;
    const auto& expect = s.expect_status;

    if (v == "register") {
      register_rider(actor(s.args[0]), expect, line);
    } else if (v == "review") {
      review(actor(s.args[0]), s.args[1], expect, line);
    } else if (v == "login") {
      auto& a = actor(s.args[0]);
      const auto pw = s.options.contains("password") ? s.options.at("password") : a.decl->password;
      login(a, pw, expect, line);
    } else if (v == "onboard") {
      const auto names = s.args[0] == "all" ? riders() : std::vector<std::string>{s.args[0]};
      for (const auto& n : names) {
        auto& a = actor(n);
        register_rider(a, std::nullopt, line);
        drain();
        review(a, "accept", std::nullopt, line);
        drain();
        login(a, a.decl->password, std::nullopt, line);
        drain();
      }
    } else if (v == "request") {
      auto names = s.args[0] == "all" ? riders() : std::vector<std::string>{s.args[0]};
      if (s.options.contains("order") && s.options.at("order") == "shuffled") shuffle(names);
      const auto seats = std::stoi(s.options.at("seats"));
      for (const auto& n : names) {
        auto& a = actor(n);
        GeoPoint from;
        GeoPoint to;
        pick_endpoints(s.options.at("from"), s.options.at("to"), from, to);
        json body{{"pickup", from}, {"dropoff", to}, {"seats", seats}};
        auto r = act(a, "POST", "/confirm-ride", body, expect, line);
        if (r.status == 200) a.request_id = r.body.at("request_id").get<std::string>();
        drain();
      }
    } else if (v == "accept" || v == "reject") {
      auto& car = actor(s.args[0]);
      auto it = car.offers.begin();
      if (s.options.contains("rider")) {
        const auto& want = actor(s.options.at("rider")).account_id;
        it = std::find_if(car.offers.begin(), car.offers.end(),
                          [&](const json& o) { return o.value("rider_id", std::string{}) == want; });
      }
      if (it == car.offers.end()) fail(line, fmt::format("{} holds no matching offer", car.decl->name));
      const auto request = it->value("request_id", std::string{});
      car.offers.erase(it);
      auto r = act(car, "POST", "/" + v + "-ride", {{"request_id", request}}, expect, line);
      if (v == "accept" && r.status == 200) {
        car.active_ride = r.body.at("ride_id").get<std::string>();
        car.last_ride = car.active_ride;
      }
    } else if (v == "stage") {
      auto& car = actor(s.args[0]);
      const auto ride = car.active_ride.empty() ? car.last_ride : car.active_ride;
      if (ride.empty()) fail(line, fmt::format("{} has no ride", car.decl->name));
      auto r = act(car, "POST", fmt::format("/rides/{}/stage", ride), {{"target_stage", s.args[1]}}, expect, line);
      if (r.status == 200 && r.body.value("stage", std::string{}) == "finished") car.active_ride.clear();
    } else if (v == "drive") {
      auto& car = actor(s.args[0]);
      std::vector<GeoPoint> path;
      if (s.args.size() == 2) {
        auto r = track(car, std::nullopt, line);
        drain();
        path = r.body.at("route").at("polyline").get<std::vector<GeoPoint>>();
        if (path.empty() || path.front() != car.position) path.insert(path.begin(), car.position);
      } else {
        path.push_back(car.position);
        std::string list = s.options.at("via");
        std::size_t start = 0;
        while (start <= list.size()) {
          const auto comma = list.find(',', start);
          const auto name = list.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
          if (!name.empty()) path.push_back(node_position(name));
          if (comma == std::string::npos) break;
          start = comma + 1;
        }
      }
      drive(car, path, line);
    } else if (v == "location") {
      auto& car = actor(s.args[0]);
      const auto offset = s.options.contains("offset_ms") ? std::stoll(s.options.at("offset_ms")) : 0LL;
      advance(step_);
      publish(car, point_of(s.options.at("at")), offset, expect, line);
    } else if (v == "track") {
      advance(step_);
      track(actor(s.args[0]), expect, line);
    } else if (v == "wait") {
      advance(Millis{std::stoll(s.args[0]) * 1000});
      note("clock", fmt::format("waited {} s", s.args[0]));
    } else if (v == "disconnect") {
      disconnect(actor(s.args[0]));
    } else if (v == "connect") {
      auto& a = actor(s.args[0]);
      if (a.token.empty()) fail(line, fmt::format("{} is not logged in", a.decl->name));
      if (a.rt) disconnect(a);
      connect(a, line);
    } else if (v == "restart") {
      restart(line);
    }
  }

  void restart(std::size_t line) {
    std::vector<std::string> connected;
    for (const auto& d : scenario_.actors) {
      auto& a = actor(d.name);
      if (a.rt) {
        a.rt->close();
        a.rt.reset();
        connected.push_back(d.name);
      }
    }
    api_.reset();
    host_->stop();
    host_.reset();
    if (config_.store.rfind("log:", 0) == 0 || config_.store.rfind("sqlite:", 0) == 0) {
      store_.reset();
      store_ = store::open_store(config_.store);
    }
    note("service", "restarted from persisted state");
    start_service();
    for (const auto& n : connected) connect(actor(n), line);
  }

  void pick_endpoints(const std::string& from_spec, const std::string& to_spec, GeoPoint& from, GeoPoint& to) {
    const auto n = graph_.size();
    std::size_t from_index = 0;
    if (from_spec == "random") {
      from_index = draw(n);
      from = graph_.position_at(from_index);
    } else {
      from = point_of(from_spec);
    }
    if (to_spec == "random") {
      std::size_t to_index = draw(n);
      while (n > 1 && graph_.position_at(to_index) == from) to_index = draw(n);
      to = graph_.position_at(to_index);
    } else {
      to = point_of(to_spec);
    }
  }

  // ------------------------------------------------------- assertions

  void assertion_failed(const Assertion& a, const std::string& what, std::optional<std::size_t> index) {
    std::string msg = fmt::format("line {}: assert {} failed: {}", a.line, a.kind, what);
    if (index) msg += "\n" + transcript_.excerpt(*index);
    failures_.push_back(std::move(msg));
  }

  void report(const Assertion& a, const std::vector<Violation>& violations) {
    if (violations.empty()) return;
    std::string what = violations.front().message;
    if (violations.size() > 1) what += fmt::format(" (+{} more)", violations.size() - 1);
    assertion_failed(a, what, violations.front().index);
  }

  std::optional<std::string> last_stage(const std::string& ride) const {
    std::optional<std::string> out;
    for (const auto& e : transcript_.entries()) {
      if (e.kind != TranscriptEntry::Kind::Http || e.status != 200 || !e.response.is_object()) continue;
      if (e.response.value("ride_id", std::string{}) == ride && e.response.contains("stage")) {
        out = e.response.at("stage").get<std::string>();
      }
    }
    return out;
  }

  void check_assertions() {
    for (const auto& a : scenario_.assertions) {
      const auto& k = a.kind;
      if (k == "events") {
        std::vector<std::string> want(a.args.begin() + 1, a.args.end());
        std::vector<std::string> got;
        for (auto t : events_for(transcript_, a.args[0])) got.emplace_back(realtime::to_string(t));
        if (want != got) {
          assertion_failed(a, fmt::format("{} received [{}], expected [{}]", a.args[0], fmt::join(got, " "),
                                          fmt::join(want, " ")),
                           std::nullopt);
        }
      } else if (k == "exactly-once") {
        auto type = realtime::parse_event_type(a.args[0]);
        if (!type) throw Error(ErrorCode::ScenarioInvalid, fmt::format("line {}: unknown event type", a.line));
        report(a, assert_exactly_once(transcript_, *type));
      } else if (k == "fifo" || k == "acceptance-order") {
        const auto r = k == "fifo" ? assert_fifo(transcript_) : assert_acceptance_order(transcript_);
        report(a, r.violations);
        if (r.ok()) note("assert", fmt::format("{}: {} items, 0 inversions", k, r.items));
      } else if (k == "no-double-assignment") {
        report(a, assert_no_double_assignment(transcript_));
      } else if (k == "stage") {
        const auto& who = actor(a.args[0]);
        const auto ride = who.decl->kind == Kind::Car ? who.last_ride : who.ride_id;
        const auto stage = last_stage(ride);
        if (stage != a.args[1]) {
          assertion_failed(a, fmt::format("{} ride '{}' is at {}", a.args[0], ride, stage.value_or("<none>")),
                           std::nullopt);
        }
      } else if (k == "reroutes") {
        const auto n = reroutes_seen(transcript_, a.args[0]);
        if (std::to_string(n) != a.args[1]) {
          assertion_failed(a, fmt::format("{} saw {} reroutes", a.args[0], n), std::nullopt);
        }
      } else if (k == "hysteresis") {
        report(a, assert_hysteresis(transcript_, a.args[0], config_.reroute_threshold_m));
      } else if (k == "arrived") {
        check_arrived(a);
      } else if (k == "outbox") {
        const auto n = host_->service().outbox().size();
        if (std::to_string(n) != a.args[0]) assertion_failed(a, fmt::format("outbox holds {} emails", n), std::nullopt);
      } else if (k == "username") {
        const auto& got = actor(a.args[0]).username;
        if (got != a.args[1]) assertion_failed(a, fmt::format("{} got username '{}'", a.args[0], got), std::nullopt);
      }
    }
  }

  void check_arrived(const Assertion& a) {
    const double radius = a.options.contains("radius_m") ? parse_double(a.options.at("radius_m"), "radius_m")
                                                         : kDefaultArrivalRadiusM;
    const GeoPoint target = point_of(a.args[1]);
    std::optional<GeoPoint> last;
    std::size_t index = 0;
    for (std::size_t i = 0; i < transcript_.size(); ++i) {
      const auto& e = transcript_.entries()[i];
      if (e.kind == TranscriptEntry::Kind::Http && e.actor == a.args[0] && e.path == "/location" && e.status == 200) {
        last = GeoPoint{e.request.at("lat").get<double>(), e.request.at("lon").get<double>()};
        index = i;
      }
    }
    if (!last) {
      assertion_failed(a, fmt::format("{} never published a location", a.args[0]), std::nullopt);
      return;
    }
    const double d = geo::haversine_distance(*last, target);
    if (d > radius) {
      assertion_failed(a, fmt::format("{} ended {:.1f} m from {}", a.args[0], d, a.args[1]), index);
    }
  }

  const Scenario& scenario_;
  RunOptions options_;
  std::mt19937_64 rng_;
  ManualClock clock_;
  std::int64_t start_ms_{};
  Millis step_{1000};
  service::ServiceConfig config_;
  geo::RoadGraph graph_;
  std::shared_ptr<store::DocumentStore> store_;
  std::unique_ptr<service::ServiceHost> host_;
  std::unique_ptr<ApiClient> api_;
  std::map<std::string, Actor> actors_;
  Transcript transcript_;
  std::vector<std::string> failures_;
  std::size_t current_line_{0};
  std::filesystem::path scratch_;
};

}  // namespace

RunResult run_scenario(const Scenario& scenario, const RunOptions& options) { return Runner(scenario, options).run(); }

void require_pass(const RunResult& result) {
  if (result.ok()) return;
  throw Error(ErrorCode::AssertionFailed,
              fmt::format("scenario {} (seed {}): {}", result.scenario, result.seed, result.failures.front()));
}

}  // namespace campusride::sim
