// Command-line entry point: the service, operator tooling and the
// simulation harness.

#include <csignal>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <thread>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "campusride/domain/error.hpp"
#include "campusride/geo/road_graph.hpp"
#include "campusride/service/host.hpp"
#include "campusride/sim/runner.hpp"
#include "campusride/store/document_store.hpp"

namespace cr = campusride;

namespace {

struct ServeFlags {
  std::optional<std::string> bind;
  std::optional<int> realtime_port;
  std::optional<std::string> graph;
  std::optional<std::string> store;
  std::optional<std::string> outbox;
  std::optional<long long> offer_timeout_ms;
  std::optional<double> reroute_threshold_m;
  bool fast_hashing{false};
};

cr::service::ServiceConfig config_from(const ServeFlags& f) {
  auto c = cr::service::ServiceConfig::from_env();
  if (f.bind) c.set_bind_addr(*f.bind);
  if (f.realtime_port) c.realtime_port = *f.realtime_port;
  if (f.graph) c.graph_file = *f.graph;
  if (f.store) c.store = *f.store;
  if (f.outbox) c.outbox_dir = *f.outbox;
  if (f.offer_timeout_ms) c.offer_timeout = cr::Millis{*f.offer_timeout_ms};
  if (f.reroute_threshold_m) c.reroute_threshold_m = *f.reroute_threshold_m;
  if (f.fast_hashing) c.fast_password_hashing = true;
  if (c.graph_file.empty()) throw cr::Error(cr::ErrorCode::InvalidArgument, "no road graph: pass --graph or set GRAPH_FILE");
  return c;
}

int serve(const ServeFlags& flags) {
  const auto config = config_from(flags);
  auto graph = cr::geo::RoadGraph::load(config.graph_file);
  auto store = cr::store::open_store(config.store);
  cr::SystemClock clock;

  sigset_t signals;
  sigemptyset(&signals);
  sigaddset(&signals, SIGINT);
  sigaddset(&signals, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &signals, nullptr);

  cr::service::ServiceHost host(config, store, std::move(graph), clock, cr::service::make_external_router(config));
  host.start();
  spdlog::info("serving http on {}:{} and realtime on {}:{}", host.host(), host.http_port(), host.host(),
               host.realtime_port());
  std::cout << fmt::format("listening http={} realtime={}", host.http_port(), host.realtime_port()) << std::endl;

  int sig = 0;
  sigwait(&signals, &sig);
  spdlog::info("signal {} received, shutting down", sig);
  host.stop();
  return 0;
}

/// A service over the configured store without listeners, for operator
/// commands that write accounts and cars.
struct Offline {
  cr::SystemClock clock;
  std::unique_ptr<cr::service::Service> service;

  explicit Offline(const ServeFlags& flags) {
    const auto config = config_from(flags);
    service = std::make_unique<cr::service::Service>(
        config, cr::service::Service::Deps{cr::store::open_store(config.store),
                                           cr::geo::RoadGraph::load(config.graph_file), &clock, nullptr, nullptr});
  }
};

void add_store_flags(CLI::App* cmd, ServeFlags& f) {
  cmd->add_option("--graph", f.graph, "Road graph file (GRAPH_FILE)");
  cmd->add_option("--store", f.store, "memory, log:<path> or sqlite:<path> (STORE)");
}

int run_sim(const std::string& name, std::uint64_t seed, const std::optional<std::string>& csv,
            const std::optional<std::string>& transcript_out, bool print_transcript) {
  const auto scenario = cr::sim::load_scenario(cr::sim::resolve_scenario(name));
  cr::sim::RunOptions options;
  options.seed = seed;
  const auto result = cr::sim::run_scenario(scenario, options);

  if (print_transcript) std::cout << result.transcript.render();
  if (transcript_out) {
    std::ofstream out(*transcript_out);
    out << result.transcript.render();
  }
  if (csv) {
    std::ofstream out(*csv);
    out << result.metrics.csv();
  }
  std::cout << fmt::format("scenario {} seed {}: {} entries in {:.3f} s\n", result.scenario, result.seed,
                           result.transcript.size(), result.wall_seconds);
  std::cout << result.metrics.summary();
  for (const auto& f : result.failures) std::cout << "FAIL " << f << "\n";
  std::cout << (result.ok() ? "PASS" : "FAIL") << "\n";
  return result.ok() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Campus ride-sharing dispatch service"};
  app.require_subcommand(1);
  std::string log_level = "info";
  app.add_option("--log-level", log_level, "trace, debug, info, warn, error or off");

  ServeFlags flags;
  auto* serve_cmd = app.add_subcommand("serve", "Run the HTTP API and realtime gateway");
  add_store_flags(serve_cmd, flags);
  serve_cmd->add_option("--bind", flags.bind, "HTTP host:port; realtime takes the next port (BIND_ADDR)");
  serve_cmd->add_option("--realtime-port", flags.realtime_port, "Realtime port (REALTIME_PORT)");
  serve_cmd->add_option("--outbox", flags.outbox, "Directory receiving notification emails (OUTBOX_DIR)");
  serve_cmd->add_option("--offer-timeout-ms", flags.offer_timeout_ms, "Offer timeout (OFFER_TIMEOUT_MS)");
  serve_cmd->add_option("--reroute-threshold-m", flags.reroute_threshold_m, "Reroute threshold (REROUTE_THRESHOLD_M)");
  serve_cmd->add_flag("--fast-hashing", flags.fast_hashing, "Minimum password hashing cost, for test rigs");

  auto* admin_cmd = app.add_subcommand("admin", "Administrator accounts");
  admin_cmd->require_subcommand(1);
  std::string admin_user;
  std::string admin_password;
  auto* bootstrap = admin_cmd->add_subcommand("bootstrap", "Create an approved admin account");
  add_store_flags(bootstrap, flags);
  bootstrap->add_option("--username", admin_user)->required();
  bootstrap->add_option("--password", admin_password)->required();

  auto* car_cmd = app.add_subcommand("car", "Fleet management");
  car_cmd->require_subcommand(1);
  std::string car_id;
  int capacity = 4;
  std::string car_password;
  auto* provision = car_cmd->add_subcommand("provision", "Register a car and its driver account");
  add_store_flags(provision, flags);
  provision->add_option("--id", car_id)->required();
  provision->add_option("--capacity", capacity)->required()->check(CLI::PositiveNumber);
  provision->add_option("--password", car_password, "Driver password (username is the car id)")->required();

  auto* graph_cmd = app.add_subcommand("graph", "Road graph tooling");
  graph_cmd->require_subcommand(1);
  std::string graph_file;
  auto* validate = graph_cmd->add_subcommand("validate", "Parse and validate a graph file");
  validate->add_option("file", graph_file)->required();

  auto* sim_cmd = app.add_subcommand("sim", "Scripted scenarios under virtual time");
  sim_cmd->require_subcommand(1);
  std::string scenario;
  std::uint64_t seed = 1;
  std::optional<std::string> csv;
  std::optional<std::string> transcript_out;
  bool print_transcript = false;
  auto* run = sim_cmd->add_subcommand("run", "Run a scenario; exit status 0 iff every assertion passes");
  run->add_option("scenario", scenario, "Bundled scenario name or .scn path")->required();
  run->add_option("--seed", seed);
  run->add_option("--csv", csv, "Write metrics as CSV");
  run->add_option("--transcript", transcript_out, "Write the rendered transcript");
  run->add_flag("--print-transcript", print_transcript);
  auto* list = sim_cmd->add_subcommand("list", "List bundled scenarios");

  CLI11_PARSE(app, argc, argv);
  spdlog::set_level(spdlog::level::from_str(log_level));

  try {
    if (*serve_cmd) return serve(flags);
    if (*bootstrap) {
      Offline off(flags);
      const auto admin = off.service->bootstrap_admin(admin_user, admin_password);
      std::cout << fmt::format("admin {} ({})\n", admin.username, admin.account_id.str());
      return 0;
    }
    if (*provision) {
      Offline off(flags);
      const auto car = off.service->provision_car(cr::CarId{car_id}, capacity, car_password);
      std::cout << fmt::format("car {} with {} seats\n", car.car_id.str(), car.capacity);
      return 0;
    }
    if (*validate) {
      const auto g = cr::geo::RoadGraph::load(graph_file);
      std::cout << fmt::format("{}: {} nodes, {} edges, valid\n", graph_file, g.size(), g.edges().size());
      return 0;
    }
    if (*run) return run_sim(scenario, seed, csv, transcript_out, print_transcript);
    if (*list) {
      for (const auto& name : cr::sim::list_scenarios()) std::cout << name << "\n";
      return 0;
    }
  } catch (const cr::Error& e) {
    std::cerr << "error: " << cr::to_string(e.code()) << ": " << e.what() << "\n";
    return 2;
  }
  return 0;
}
