#pragma once

#include <chrono>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>

#include "campusride/domain/error.hpp"
#include "campusride/geo/router.hpp"

namespace campusride::geo {

/// An ORS-compatible directions service. The request goes to
/// `<base_url><path>/<profile>/geojson`.
struct DirectionsEndpoint {
  std::string base_url;  // scheme://host[:port]
  std::string path{"/v2/directions"};
  std::string profile{"driving-car"};
  std::string api_key;
  std::chrono::milliseconds min_interval{1500};
  std::chrono::milliseconds timeout{5000};
};

/// Request body: {"coordinates": [[lon, lat], [lon, lat]]}.
[[nodiscard]] std::string build_directions_request(const GeoPoint& from, const GeoPoint& to);

/// Parses a GeoJSON directions response. Throws Error{MalformedResponse}.
[[nodiscard]] Route parse_directions_response(std::string_view body);

/// Blocking client with a per-endpoint minimum spacing between calls.
class ExternalRouter {
 public:
  explicit ExternalRouter(DirectionsEndpoint endpoint);

  /// Throws NetworkFailure, RateLimited or MalformedResponse.
  [[nodiscard]] Route fetch(const GeoPoint& from, const GeoPoint& to);

  [[nodiscard]] const DirectionsEndpoint& endpoint() const noexcept { return endpoint_; }

 private:
  DirectionsEndpoint endpoint_;
  std::mutex mu_;
  std::optional<std::chrono::steady_clock::time_point> last_call_;
};

struct RouteResult {
  Route route;
  bool external{false};
  std::optional<ErrorCode> failure;  // set when the external call failed and the local router answered
};

/// External route when available, otherwise Dijkstra over `graph` between the
/// snapped endpoints. External failures are logged and never propagate;
/// errors from the local fallback do.
[[nodiscard]] RouteResult fetch_external_route(ExternalRouter* router, const RoadGraph& graph, const GeoPoint& from,
                                               const GeoPoint& to, double snap_radius_m = kSnapRadiusM,
                                               double speed_mps = kCampusSpeedMps);

}  // namespace campusride::geo
