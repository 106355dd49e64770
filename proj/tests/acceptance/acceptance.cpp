// Runs every primary acceptance criterion and prints one PASS/FAIL line each.
// Exit status is non-zero when any criterion fails.

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <csignal>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>
#include <latch>
#include <map>
#include <random>
#include <set>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include <fmt/format.h>
#include <spdlog/spdlog.h>
#include <fcntl.h>
#include <spawn.h>
#include <sys/wait.h>
#include <unistd.h>

#include "campusride/accounts/accounts.hpp"
#include "campusride/accounts/password.hpp"
#include "campusride/accounts/username.hpp"
#include "campusride/domain/error.hpp"
#include "campusride/domain/json.hpp"
#include "campusride/domain/stage_machine.hpp"
#include "campusride/geo/haversine.hpp"
#include "campusride/geo/router.hpp"
#include "campusride/service/host.hpp"
#include "campusride/sim/analysis.hpp"
#include "campusride/sim/clients.hpp"
#include "campusride/sim/runner.hpp"
#include "campusride/sim/scenario.hpp"
#include "campusride/store/document_store.hpp"
#include "../support/fixtures.hpp"
#include "../support/oracles.hpp"

extern char** environ;

using namespace campusride;
using nlohmann::json;
using realtime::EventType;
namespace fs = std::filesystem;

namespace {

/// Collects failed expectations for one criterion.
class Check {
 public:
  void expect(bool ok, const std::string& what) {
    ++checks_;
    if (!ok) failures_.push_back(what);
  }
  [[nodiscard]] const std::vector<std::string>& failures() const noexcept { return failures_; }
  [[nodiscard]] std::size_t checks() const noexcept { return checks_; }

 private:
  std::vector<std::string> failures_;
  std::size_t checks_{0};
};

template <class F>
std::optional<ErrorCode> code_of(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  return std::nullopt;
}

struct ScratchDir {
  ScratchDir() {
    static int n = 0;
    path = fs::temp_directory_path() / fmt::format("campusride-acceptance-{}-{}", ::getpid(), n++);
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~ScratchDir() {
    std::error_code ec;
    fs::remove_all(path, ec);
  }
  fs::path path;
};

sim::RunResult run_named(const std::string& name, std::uint64_t seed = 1) {
  sim::RunOptions options;
  options.seed = seed;
  return sim::run_scenario(sim::load_scenario(sim::resolve_scenario(name)), options);
}

void expect_run_ok(Check& c, const sim::RunResult& r) {
  c.expect(r.ok(), fmt::format("{} seed {}: {}", r.scenario, r.seed, r.failures.empty() ? "" : r.failures[0]));
}

// ---------------------------------------------------------------------------

void full_ride(Check& c) {
  const auto r = run_named("full_ride");
  expect_run_ok(c, r);
  c.expect(r.wall_seconds < 5.0, fmt::format("wall clock {:.3f} s", r.wall_seconds));
  const std::vector<EventType> want{EventType::RideAccepted, EventType::DriverArrived, EventType::RideEnded};
  c.expect(sim::events_for(r.transcript, "sara") == want, "rider events not [ride-accepted, driver-arrived, ride-ended]");
  for (const auto type : want) {
    const auto v = sim::assert_exactly_once(r.transcript, type);
    c.expect(v.empty(), fmt::format("{}: {}", realtime::to_string(type), v.empty() ? "" : v[0].message));
  }
  // Every stage transition was acknowledged in order.
  std::vector<std::string> stages;
  for (const auto& e : r.transcript.entries()) {
    if (e.kind == sim::TranscriptEntry::Kind::Http && e.actor == "car-1" && e.status == 200 &&
        e.path.find("/stage") != std::string::npos) {
      stages.push_back(e.response.at("stage").get<std::string>());
    }
  }
  c.expect(stages == std::vector<std::string>{"head_to_pickup", "i_have_arrived", "start_ride", "finished"},
           fmt::format("stage acknowledgements {}", json(stages).dump()));
}

void fifo(Check& c) {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const auto r = run_named("fifo_100", seed);
    expect_run_ok(c, r);
    const auto offers = sim::assert_fifo(r.transcript);
    c.expect(offers.items >= 100, fmt::format("seed {}: {} first offers", seed, offers.items));
    c.expect(offers.inversions == 0, fmt::format("seed {}: {} offer inversions", seed, offers.inversions));
    const auto claims = sim::assert_acceptance_order(r.transcript);
    c.expect(claims.items == 100 && claims.inversions == 0,
             fmt::format("seed {}: {} claims, {} inversions", seed, claims.items, claims.inversions));
    c.expect(sim::assert_no_double_assignment(r.transcript).empty(), fmt::format("seed {}: double assignment", seed));
  }
}

/// A logged-in participant with an open realtime session.
struct LiveCar {
  std::string token;
  std::unique_ptr<sim::ApiClient> api;
  std::unique_ptr<sim::RealtimeClient> rt;
  std::thread reader;
};

void race_safety(Check& c) {
  service::ServiceConfig config;
  config.http_port = 0;
  config.realtime_port = 0;
  config.fast_password_hashing = true;
  config.background_sweep = false;
  ManualClock clock;
  auto graph = testing::small_grid();
  service::ServiceHost host(config, store::open_store("memory"), graph, clock);
  host.start();
  const std::string h = "127.0.0.1";
  sim::ApiClient admin_api(h, host.http_port());

  auto login = [&](sim::ApiClient& api, const std::string& user, const std::string& password) {
    const auto r = api.post("/login", {{"username", user}, {"password", password}});
    return r.status == 200 ? r.body.at("token").get<std::string>() : std::string{};
  };

  (void)host.service().bootstrap_admin("ops", "ops-secret");
  const auto admin = login(admin_api, "ops", "ops-secret");
  const auto reg = admin_api.post("/register", {{"university_id", "U1"}, {"email", "r@campus.example"},
                                                {"first_name", "Race"},  {"last_name", "Rider"},
                                                {"phone", "0100"},       {"password", "rider-secret"}});
  (void)admin_api.post("/admin/review", {{"account_id", reg.body.value("account_id", "")}, {"decision", "accept"}},
                       admin);
  sim::ApiClient rider_api(h, host.http_port());
  const auto rider = login(rider_api, reg.body.value("username", ""), "rider-secret");
  c.expect(!rider.empty(), "rider login");

  std::atomic<bool> stopping{false};
  std::vector<LiveCar> cars(2);
  for (std::size_t i = 0; i < cars.size(); ++i) {
    const auto id = fmt::format("car-{}", i + 1);
    (void)host.service().provision_car(CarId{id}, 4, id + "-secret");
    cars[i].api = std::make_unique<sim::ApiClient>(h, host.http_port());
    cars[i].token = login(*cars[i].api, id, id + "-secret");
    cars[i].rt = std::make_unique<sim::RealtimeClient>(h, host.realtime_port(), std::chrono::milliseconds{200});
    (void)cars[i].rt->authenticate(cars[i].token);
  }
  LiveCar rider_session;
  rider_session.rt = std::make_unique<sim::RealtimeClient>(h, host.realtime_port(), std::chrono::milliseconds{200});
  (void)rider_session.rt->authenticate(rider);
  while (host.gateway().connection_count() < cars.size() + 1) std::this_thread::sleep_for(std::chrono::milliseconds{1});
  // Events are read and discarded so socket buffers never fill.
  for (auto* session : {&cars[0], &cars[1], &rider_session}) {
    session->reader = std::thread([&stopping, rt = session->rt.get()] {
      while (!stopping) {
        try {
          (void)rt->next_frame();
        } catch (const Error&) {
        }
      }
    });
  }

  const char* stages[] = {"head_to_pickup", "i_have_arrived", "start_ride", "end_ride"};
  const json body{{"pickup", graph.position(NodeId{"g0"})}, {"dropoff", graph.position(NodeId{"g8"})}, {"seats", 2}};
  int clean = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const auto confirm = rider_api.post("/confirm-ride", body, rider);
    if (confirm.status != 200 || confirm.body.value("state", "") != "offered") {
      c.expect(false, fmt::format("trial {}: confirm {} {}", trial, confirm.status, confirm.body.dump()));
      break;
    }
    const auto request_id = confirm.body.at("request_id").get<std::string>();
    std::latch start(3);
    int status[2] = {0, 0};
    json won[2];
    std::vector<std::thread> claims;
    for (int i = 0; i < 2; ++i) {
      claims.emplace_back([&, i] {
        start.arrive_and_wait();
        const auto r = cars[i].api->post("/accept-ride", {{"request_id", request_id}}, cars[i].token);
        status[i] = r.status;
        won[i] = r.body;
      });
    }
    start.arrive_and_wait();
    for (auto& t : claims) t.join();

    const bool one_winner = std::min(status[0], status[1]) == 200 && std::max(status[0], status[1]) == 409;
    c.expect(one_winner, fmt::format("trial {}: statuses {} and {}", trial, status[0], status[1]));
    if (!one_winner) continue;

    std::map<CarId, int> held;
    for (const auto& ride : host.service().rides()) {
      if (ride.active()) held[ride.car_id] += ride.request.seats;
    }
    bool conserved = true;
    for (const auto& car : host.service().fleet()) conserved &= held[car.car_id] + car.seats_available == car.capacity;
    c.expect(conserved, fmt::format("trial {}: seat conservation", trial));

    const int w = status[0] == 200 ? 0 : 1;
    const auto ride_id = won[w].at("ride_id").get<std::string>();
    bool finished = true;
    for (const char* stage : stages) {
      const auto r = cars[w].api->post(fmt::format("/rides/{}/stage", ride_id), {{"target_stage", stage}}, cars[w].token);
      finished &= r.status == 200;
    }
    const auto view = rider_api.get("/rides/" + ride_id, rider);
    finished &= view.status == 200 && view.body.at("stage") == "finished";
    c.expect(finished, fmt::format("trial {}: ride did not finish", trial));
    if (finished && conserved) ++clean;
  }
  for (const auto& car : host.service().fleet()) {
    c.expect(car.available && car.seats_available == car.capacity, car.car_id.str() + " not released");
  }
  c.expect(clean == 1000, fmt::format("{} of 1000 trials clean", clean));

  stopping = true;
  for (auto* session : {&cars[0], &cars[1], &rider_session}) {
    session->reader.join();
    session->rt->close();
  }
  host.stop();
}

Ride ride_at(RideStage stage) {
  Ride r;
  r.ride_id = RideId{"ride-1"};
  r.car_id = CarId{"car-1"};
  r.request.request_id = RequestId{"req-1"};
  r.request.rider_id = AccountId{"acct-1"};
  r.stage = stage;
  const auto legs = derive_leg_statuses(stage);
  r.pickup_status = legs.pickup;
  r.dropoff_status = legs.dropoff;
  return r;
}

void state_machine(Check& c) {
  int legal = 0;
  for (std::size_t i = 0; i < 6; ++i) {
    for (std::size_t j = 0; j < 6; ++j) {
      const auto from = kAllStages[i];
      const auto to = kAllStages[j];
      const auto label = fmt::format("{} -> {}", to_string(from), to_string(to));
      if (j == i + 1) {
        const auto next = advance_stage(ride_at(from), required_actor(to), to, from_millis(1000));
        c.expect(next.stage == to, label + " not applied");
        ++legal;
        continue;
      }
      // Rejected whoever asks.
      for (const auto actor : {Actor::Driver, Actor::System}) {
        const auto code = code_of([&] { (void)advance_stage(ride_at(from), actor, to, from_millis(1000)); });
        const auto want = j <= i ? ErrorCode::StaleRide : ErrorCode::IllegalTransition;
        c.expect(code == want, label + " accepted or misclassified");
      }
    }
  }
  c.expect(legal == 5, "five legal transitions");

  using L = LegStatus;
  const std::pair<RideStage, LegStatuses> table[] = {
      {RideStage::StartJourney, {L::Pending, L::Pending}},     {RideStage::HeadToPickup, {L::Enroute, L::Pending}},
      {RideStage::IHaveArrived, {L::Arrived, L::Pending}},     {RideStage::StartRide, {L::Completed, L::Enroute}},
      {RideStage::EndRide, {L::Completed, L::Completed}},      {RideStage::Finished, {L::Completed, L::Completed}},
  };
  for (const auto& [stage, legs] : table) {
    c.expect(derive_leg_statuses(stage) == legs, fmt::format("leg statuses for {}", to_string(stage)));
  }
}

void routing_oracle(Check& c) {
  std::mt19937_64 rng(20260101);
  std::size_t queries = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const auto g = testing::random_graph(rng);
    for (std::size_t s = 0; s < g.size(); ++s) {
      for (std::size_t t = 0; t < g.size(); ++t) {
        ++queries;
        const double oracle = testing::brute_force_cost(g, s, t);
        const auto label = fmt::format("graph {} {} -> {}", trial, s, t);
        if (std::isinf(oracle)) {
          c.expect(code_of([&] { (void)geo::shortest_route(g, g.id_at(s), g.id_at(t)); }) == ErrorCode::Unreachable,
                   label + ": unreachable pair routed");
          continue;
        }
        try {
          const auto r = geo::shortest_route(g, g.id_at(s), g.id_at(t));
          c.expect(std::abs(r.distance_m - oracle) <= 1e-9 * std::max(1.0, oracle),
                   fmt::format("{}: {} vs oracle {}", label, r.distance_m, oracle));
        } catch (const Error& e) {
          c.expect(false, fmt::format("{}: {}", label, e.what()));
        }
      }
    }
  }
  c.expect(queries >= 200, "query count");
}

void haversine(Check& c) {
  const double equator = geo::haversine_distance({0.0, 0.0}, {0.01, 0.0});
  const double cairo = geo::haversine_distance({30.0, 31.40}, {30.0, 31.41});
  c.expect(std::abs(equator - testing::kEquatorCentidegreeM) <= 1e-6, fmt::format("equator fixture {}", equator));
  c.expect(std::abs(equator - 1111.95) <= 0.01, "equator fixture outside 0.01 m of 1111.95");
  c.expect(std::abs(cairo - testing::kCairoCentidegreeLonM) <= 1e-6, fmt::format("campus fixture {}", cairo));
  c.expect(std::abs(cairo - 963.1) <= 1.0, "campus fixture outside 1 m of 963.1");

  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> lat(-90, 90);
  std::uniform_real_distribution<double> lon(-180, 180);
  for (int i = 0; i < 10000; ++i) {
    const GeoPoint a{lat(rng), lon(rng)};
    const GeoPoint b{lat(rng), lon(rng)};
    const GeoPoint p{lat(rng), lon(rng)};
    const double ab = geo::haversine_distance(a, b);
    const double ba = geo::haversine_distance(b, a);
    const double ap = geo::haversine_distance(a, p);
    const double pb = geo::haversine_distance(p, b);
    c.expect(std::abs(ab - ba) <= 1e-6 * std::max(ab, 1.0), fmt::format("asymmetric triple {}", i));
    c.expect(ab <= (ap + pb) * (1 + 1e-6), fmt::format("triangle inequality triple {}", i));
  }
}

void blockage(Check& c) {
  const auto r = run_named("blockage");
  expect_run_ok(c, r);
  constexpr double kThreshold = 30.0;
  std::size_t polls = 0;
  std::size_t reroutes = 0;
  for (const auto& e : r.transcript.entries()) {
    if (e.kind != sim::TranscriptEntry::Kind::Http || e.actor != "lina" || e.status != 200 ||
        e.path.find("/track") == std::string::npos) {
      continue;
    }
    ++polls;
    const double deviation = e.response.at("deviation_m").get<double>();
    const bool rerouted = e.response.at("rerouted").get<bool>();
    c.expect(rerouted == (deviation > kThreshold), fmt::format("poll {}: deviation {:.1f} rerouted {}", polls,
                                                               deviation, rerouted));
    if (rerouted) ++reroutes;
  }
  c.expect(polls > 5, fmt::format("{} track polls", polls));
  c.expect(reroutes == 1, fmt::format("{} reroutes", reroutes));

  const auto graph = geo::RoadGraph::load(testing::graph_path("blockage.graph"));
  const auto dropoff = graph.position(NodeId{"D"});
  std::optional<GeoPoint> last;
  for (const auto& e : r.transcript.entries()) {
    if (e.kind == sim::TranscriptEntry::Kind::Http && e.path == "/location" && e.status == 200) {
      last = GeoPoint{e.request.at("lat").get<double>(), e.request.at("lon").get<double>()};
    }
  }
  c.expect(last && geo::haversine_distance(*last, dropoff) <= 5.0, "final position not at the drop-off");
}

void accounts_rules(Check& c) {
  c.expect(code_of([] { accounts::validate_password("abc12"); }) == ErrorCode::WeakPassword, "5 characters accepted");
  c.expect(!code_of([] { accounts::validate_password("abc123"); }), "6 characters rejected");
  c.expect(accounts::base_username("John", "Doe") == "john.doe", "john.doe");
  std::set<std::string> taken{"john.doe"};
  auto is_taken = [&](std::string_view u) { return taken.contains(std::string(u)); };
  c.expect(accounts::generate_username("John", "Doe", is_taken) == "john.doe-2", "second john.doe");
  taken.insert("john.doe-2");
  c.expect(accounts::generate_username("John", "Doe", is_taken) == "john.doe-3", "third john.doe");

  ManualClock clock;
  accounts::AccountRegistry registry(store::open_store("memory"), clock,
                                     {accounts::HashCost::minimal(), accounts::kDefaultSessionTtl, std::nullopt});
  (void)registry.provision(Role::Admin, "ops", "ops-secret");
  const auto admin = registry.login("ops", "ops-secret");
  for (int trial = 0; trial < 20; ++trial) {
    const auto a = registry.register_account({fmt::format("U{:04}", trial), fmt::format("u{}@campus.example", trial),
                                              fmt::format("First{}", trial), "Last", "0100", "secret1"});
    c.expect(code_of([&] { (void)registry.login(a.username, "secret1"); }) == ErrorCode::NotYetApproved,
             "login before approval");
    const auto before = registry.outbox().size();
    std::atomic<int> ok{0};
    std::vector<std::thread> threads;
    for (int i = 0; i < 8; ++i) {
      threads.emplace_back([&, i] {
        try {
          (void)registry.admin_review(admin, a.account_id,
                                      i % 2 ? accounts::Decision::Accept : accounts::Decision::Reject);
          ++ok;
        } catch (const Error&) {
        }
      });
    }
    for (auto& t : threads) t.join();
    c.expect(ok == 1, fmt::format("trial {}: {} reviews applied", trial, ok.load()));
    c.expect(registry.outbox().size() == before + 1, fmt::format("trial {}: outbox grew by {}", trial,
                                                                 registry.outbox().size() - before));
  }
}

// Persistence ---------------------------------------------------------------

void store_conformance(Check& c, const std::string& spec, bool durable) {
  auto s = store::open_store(spec);
  auto label = [&](const char* what) { return fmt::format("{}: {}", spec, what); };
  c.expect(!s->get("users", "u1"), label("absent key present"));
  c.expect(s->scan("users").empty(), label("empty scan"));
  const auto r1 = s->compare_and_swap("users", "u1", 0, {{"v", 1}});
  c.expect(r1.has_value(), label("create"));
  c.expect(!s->compare_and_swap("users", "u1", 0, {{"v", 2}}), label("duplicate create"));
  c.expect(!s->compare_and_swap("users", "u1", r1.value_or(0) + 5, {{"v", 2}}), label("stale revision"));
  const auto r2 = s->compare_and_swap("users", "u1", r1.value_or(0), {{"v", 3}});
  c.expect(r2 && *r2 > *r1, label("update"));
  (void)s->put("users", "u0", {{"v", "\xe2\x9c\x93"}});
  (void)s->put("cars", "u1", {{"seats", 4}});
  const auto all = s->scan("users");
  c.expect(all.size() == 2 && all[0].first == "u0" && all[1].first == "u1", label("ordered scan"));
  c.expect(s->erase("cars", "u1") && !s->get("cars", "u1"), label("erase"));

  std::atomic<int> winners{0};
  const auto base = s->get("users", "u1")->revision;
  std::vector<std::thread> threads;
  for (int i = 0; i < 8; ++i) {
    threads.emplace_back([&, i] {
      if (s->compare_and_swap("users", "u1", base, {{"v", 100 + i}})) ++winners;
    });
  }
  for (auto& t : threads) t.join();
  c.expect(winners == 1, label("concurrent compare-and-swap winners"));

  if (durable) {
    const auto snapshot = s->scan("users");
    s.reset();
    auto reopened = store::open_store(spec);
    const auto after = reopened->scan("users");
    bool same = after.size() == snapshot.size();
    for (std::size_t i = 0; same && i < after.size(); ++i) {
      same = after[i].first == snapshot[i].first && after[i].second.doc == snapshot[i].second.doc &&
             after[i].second.revision == snapshot[i].second.revision;
    }
    c.expect(same, label("reopen"));
    c.expect(!reopened->get("cars", "u1"), label("erase survives reopen"));
  }
}

/// Service state written through one instance is rebuilt by the next.
void service_restart(Check& c, const std::string& spec) {
  testing::ServiceRig rig(store::open_store(spec));
  const auto rider = rig.rider("Ana", "Lee");
  const auto driver = rig.driver("car-1");
  const auto confirm = rig.svc->confirm_ride(rider, {rig.graph.position(NodeId{"g0"}), rig.graph.position(NodeId{"g8"}), 1});
  const auto ride = rig.svc->accept_ride(driver, confirm.request.request_id);
  (void)rig.svc->advance_ride(driver, ride.ride_id, RideStage::HeadToPickup);
  const auto rides = rig.svc->rides();
  const auto fleet = rig.svc->fleet();

  rig.store.reset();
  rig.svc.reset();
  rig.store = store::open_store(spec);
  rig.restart();
  c.expect(rig.svc->rides() == rides, spec + ": rides differ after restart");
  c.expect(rig.svc->fleet() == fleet, spec + ": fleet differs after restart");
  c.expect(code_of([&] { (void)rig.svc->advance_ride(driver, ride.ride_id, RideStage::HeadToPickup); }) ==
               ErrorCode::StaleRide,
           spec + ": replayed transition applied");
  c.expect(rig.svc->authenticate(rider.token).has_value(), spec + ": session lost");
}

int run_cli(const std::vector<std::string>& args, pid_t* child = nullptr, int* stdout_fd = nullptr) {
  std::vector<char*> argv;
  std::vector<std::string> copy{CAMPUSRIDE_CLI};
  copy.insert(copy.end(), args.begin(), args.end());
  for (auto& a : copy) argv.push_back(a.data());
  argv.push_back(nullptr);

  posix_spawn_file_actions_t actions;
  posix_spawn_file_actions_init(&actions);
  int pipe_fds[2] = {-1, -1};
  if (stdout_fd != nullptr) {
    if (::pipe(pipe_fds) != 0) throw std::runtime_error("pipe failed");
    posix_spawn_file_actions_adddup2(&actions, pipe_fds[1], STDOUT_FILENO);
    posix_spawn_file_actions_addclose(&actions, pipe_fds[0]);
  } else {
    posix_spawn_file_actions_addopen(&actions, STDOUT_FILENO, "/dev/null", O_WRONLY, 0);
  }
  pid_t pid = 0;
  const int rc = posix_spawn(&pid, argv[0], &actions, nullptr, argv.data(), environ);
  posix_spawn_file_actions_destroy(&actions);
  if (rc != 0) throw std::runtime_error(fmt::format("cannot spawn {}", argv[0]));
  if (stdout_fd != nullptr) {
    ::close(pipe_fds[1]);
    *stdout_fd = pipe_fds[0];
  }
  if (child != nullptr) {
    *child = pid;
    return 0;
  }
  int status = 0;
  ::waitpid(pid, &status, 0);
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

struct Server {
  pid_t pid{0};
  int http{0};
  int realtime{0};
};

Server spawn_server(const std::vector<std::string>& store_flags) {
  auto args = std::vector<std::string>{"--log-level", "warn", "serve", "--bind", "127.0.0.1:0", "--realtime-port", "0",
                                       "--fast-hashing"};
  args.insert(args.end(), store_flags.begin(), store_flags.end());
  Server s;
  int fd = -1;
  (void)run_cli(args, &s.pid, &fd);
  FILE* out = ::fdopen(fd, "r");
  char line[256] = {};
  if (out == nullptr || std::fgets(line, sizeof line, out) == nullptr ||
      std::sscanf(line, "listening http=%d realtime=%d", &s.http, &s.realtime) != 2) {
    ::kill(s.pid, SIGKILL);
    ::waitpid(s.pid, nullptr, 0);
    throw std::runtime_error("server did not report its ports");
  }
  std::fclose(out);
  return s;
}

void kill_server(const Server& s) {
  ::kill(s.pid, SIGKILL);
  ::waitpid(s.pid, nullptr, 0);
}

/// Acknowledged writes to a live process survive SIGKILL.
void process_crash(Check& c, const std::string& spec) {
  const std::vector<std::string> flags{"--graph", testing::graph_path("campus.graph"), "--store", spec};
  auto with = [&](std::vector<std::string> a) {
    a.insert(a.end(), flags.begin(), flags.end());
    return a;
  };
  c.expect(run_cli(with({"--log-level", "warn", "admin", "bootstrap", "--username", "ops", "--password", "ops-secret"})) == 0,
           spec + ": admin bootstrap");
  c.expect(run_cli(with({"--log-level", "warn", "car", "provision", "--id", "car-1", "--capacity", "4", "--password",
                         "car-secret"})) == 0,
           spec + ": car provision");

  auto server = spawn_server(flags);
  const std::string h = "127.0.0.1";
  sim::ApiClient api(h, server.http);
  auto login = [&](sim::ApiClient& client, const std::string& user, const std::string& password) {
    const auto r = client.post("/login", {{"username", user}, {"password", password}});
    return r.status == 200 ? r.body.at("token").get<std::string>() : std::string{};
  };
  const auto admin = login(api, "ops", "ops-secret");
  const auto reg = api.post("/register", {{"university_id", "U7"}, {"email", "ana@campus.example"},
                                          {"first_name", "Ana"},  {"last_name", "Lee"},
                                          {"phone", "0100"},      {"password", "ana-secret"}});
  const auto reviewed = api.post("/admin/review", {{"account_id", reg.body.value("account_id", "")}, {"decision", "accept"}}, admin);
  const auto rider = login(api, "ana.lee", "ana-secret");
  const auto driver = login(api, "car-1", "car-secret");
  c.expect(reg.status == 201 && reviewed.status == 200 && !rider.empty() && !driver.empty(), spec + ": accounts");

  std::string ride_id;
  {
    sim::RealtimeClient rt(h, server.realtime);
    (void)rt.authenticate(driver);
    const json body{{"pickup", {{"lat", 29.9872}, {"lon", 31.4412}}}, {"dropoff", {{"lat", 29.9896}, {"lon", 31.4436}}},
                    {"seats", 2}};
    // The gateway registers the connection asynchronously; retry until the car is offered.
    std::string request_id;
    for (int attempt = 0; attempt < 100 && request_id.empty(); ++attempt) {
      const auto confirm = api.post("/confirm-ride", body, rider);
      if (confirm.status == 200 && confirm.body.value("state", "") == "offered") {
        request_id = confirm.body.at("request_id").get<std::string>();
      } else {
        std::this_thread::sleep_for(std::chrono::milliseconds{20});
      }
    }
    const auto accepted = api.post("/accept-ride", {{"request_id", request_id}}, driver);
    c.expect(accepted.status == 200, spec + ": accept-ride");
    ride_id = accepted.body.value("ride_id", "");
    const auto staged = api.post(fmt::format("/rides/{}/stage", ride_id), {{"target_stage", "head_to_pickup"}}, driver);
    c.expect(staged.status == 200, spec + ": first stage");
  }
  kill_server(server);

  server = spawn_server(flags);
  sim::ApiClient after(h, server.http);
  const auto view = after.get("/rides/" + ride_id, rider);
  c.expect(view.status == 200, fmt::format("{}: session or ride lost ({})", spec, view.status));
  c.expect(view.status == 200 && view.body.value("stage", "") == "head_to_pickup", spec + ": stage lost");
  c.expect(view.status == 200 && view.body.at("pickup_status") == "enroute", spec + ": statuses lost");
  c.expect(after.post(fmt::format("/rides/{}/stage", ride_id), {{"target_stage", "head_to_pickup"}}, driver).status == 409,
           spec + ": replayed stage applied");
  c.expect(login(after, "ana.lee", "ana-secret").size() == 64, spec + ": approval lost");
  for (const char* stage : {"i_have_arrived", "start_ride", "end_ride"}) {
    c.expect(after.post(fmt::format("/rides/{}/stage", ride_id), {{"target_stage", stage}}, driver).status == 200,
             fmt::format("{}: {} after restart", spec, stage));
  }
  const auto pending = after.get("/admin/pending", admin);
  c.expect(pending.status == 200 && pending.body.at("accounts").empty(), spec + ": admin session or review lost");
  kill_server(server);

  server = spawn_server(flags);
  sim::ApiClient last(h, server.http);
  const auto final_view = last.get("/rides/" + ride_id, rider);
  c.expect(final_view.status == 200 && final_view.body.value("stage", "") == "finished", spec + ": finish lost");
  kill_server(server);
}

void persistence(Check& c) {
  ScratchDir dir;
  store_conformance(c, "memory", false);
  for (const auto& spec : {"log:" + (dir.path / "conf.log").string(), "sqlite:" + (dir.path / "conf.db").string()}) {
    store_conformance(c, spec, true);
  }
  for (const auto& spec : {"log:" + (dir.path / "svc.log").string(), "sqlite:" + (dir.path / "svc.db").string()}) {
    service_restart(c, spec);
  }
  expect_run_ok(c, run_named("crash_recovery"));
  for (const auto& spec : {"log:" + (dir.path / "proc.log").string(), "sqlite:" + (dir.path / "proc.db").string()}) {
    try {
      process_crash(c, spec);
    } catch (const std::exception& e) {
      c.expect(false, fmt::format("{}: {}", spec, e.what()));
    }
  }
}

}  // namespace

int main() {
  spdlog::set_level(spdlog::level::warn);
  const std::vector<std::pair<std::string, std::function<void(Check&)>>> criteria{
      {"full-ride scenario", full_ride},
      {"fifo offers across 20 seeds", fifo},
      {"race safety over 1000 claim pairs", race_safety},
      {"stage machine matrix and leg table", state_machine},
      {"routing oracle on 200 random graphs", routing_oracle},
      {"haversine fixtures and properties", haversine},
      {"blockage reroute", blockage},
      {"account rules", accounts_rules},
      {"persistence conformance and crash recovery", persistence},
  };
  int failed = 0;
  for (const auto& [name, run] : criteria) {
    Check check;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      run(check);
    } catch (const std::exception& e) {
      check.expect(false, fmt::format("threw: {}", e.what()));
    }
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const auto& f = check.failures();
    if (f.empty()) {
      std::cout << fmt::format("PASS  {}  ({} checks, {:.2f} s)\n", name, check.checks(), seconds);
    } else {
      ++failed;
      std::cout << fmt::format("FAIL  {}  ({} of {} checks failed, {:.2f} s)\n", name, f.size(), check.checks(), seconds);
      for (std::size_t i = 0; i < std::min<std::size_t>(f.size(), 5); ++i) std::cout << "      " << f[i] << "\n";
    }
    std::cout.flush();
  }
  std::cout << fmt::format("{} of {} criteria passed\n", criteria.size() - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
