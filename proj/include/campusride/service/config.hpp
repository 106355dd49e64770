#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include "campusride/dispatch/dispatch_queue.hpp"
#include "campusride/domain/clock.hpp"
#include "campusride/geo/reroute.hpp"
#include "campusride/geo/router.hpp"

namespace campusride::service {

/// Runtime settings. Every field has an environment variable; see from_env().
struct ServiceConfig {
  std::string bind_host{"127.0.0.1"};
  int http_port{8080};
  int realtime_port{8081};
  std::filesystem::path graph_file;
  std::string store{"memory"};
  std::optional<std::filesystem::path> outbox_dir;

  std::optional<std::string> routing_api_key;
  std::string routing_url{"https://api.openrouteservice.org"};
  std::string routing_profile{"driving-car"};

  Millis offer_timeout{dispatch::kDefaultOfferTimeout};
  double campus_speed_mps{geo::kCampusSpeedMps};
  double snap_radius_m{geo::kSnapRadiusM};
  double reroute_threshold_m{geo::kDefaultRerouteThresholdM};
  Millis track_publish{1000};
  Millis track_poll{2000};
  Millis session_ttl{24 * 60 * 60 * 1000};

  /// libsodium's minimum Argon2 cost instead of the interactive one.
  bool fast_password_hashing{false};
  /// Run offer-timeout sweeps on a wall-clock timer. Off under virtual time.
  bool background_sweep{true};

  /// Layers BIND_ADDR (host:port), REALTIME_PORT, GRAPH_FILE, STORE,
  /// OUTBOX_DIR, ROUTING_API_KEY, ROUTING_URL, OFFER_TIMEOUT_MS,
  /// CAMPUS_SPEED_MPS, SNAP_RADIUS_M, REROUTE_THRESHOLD_M,
  /// TRACK_PUBLISH_MS, TRACK_POLL_MS over `base`. Throws
  /// Error{InvalidArgument} on unparsable values.
  static ServiceConfig from_env(ServiceConfig base);
  static ServiceConfig from_env();

  /// "host:port"; a bare port keeps the host.
  void set_bind_addr(const std::string& addr);
};

}  // namespace campusride::service
