#include "campusride/geo/external_router.hpp"

#include <httplib.h>
#include <spdlog/spdlog.h>

#include <json.hpp>

#include "campusride/geo/haversine.hpp"

namespace campusride::geo {

using nlohmann::json;

std::string build_directions_request(const GeoPoint& from, const GeoPoint& to) {
  const json body{{"coordinates", json::array({json::array({from.lon, from.lat}), json::array({to.lon, to.lat})})}};
  return body.dump();
}

Route parse_directions_response(std::string_view body) {
  const auto doc = json::parse(body, nullptr, false);
  if (doc.is_discarded() || !doc.is_object()) throw Error(ErrorCode::MalformedResponse, "response is not a JSON object");
  try {
    const auto& features = doc.at("features");
    if (!features.is_array() || features.empty()) throw Error(ErrorCode::MalformedResponse, "no route features");
    const auto& feature = features.front();
    const auto& summary = feature.at("properties").at("summary");
    const auto& coords = feature.at("geometry").at("coordinates");

    Route route;
    // Zero-valued summary fields are omitted by ORS.
    route.distance_m = summary.value("distance", 0.0);
    route.duration_s = summary.value("duration", 0.0);
    for (const auto& pair : coords) {
      if (!pair.is_array() || pair.size() < 2) throw Error(ErrorCode::MalformedResponse, "bad coordinate");
      const GeoPoint p{pair[1].get<double>(), pair[0].get<double>()};  // [lon, lat]
      if (!is_valid(p)) throw Error(ErrorCode::MalformedResponse, "coordinate out of range");
      route.polyline.push_back(p);
    }
    if (route.polyline.size() == 1) route.polyline.push_back(route.polyline.front());
    if (route.polyline.size() < 2) throw Error(ErrorCode::MalformedResponse, "geometry has fewer than two points");
    if (route.distance_m < 0.0 || route.duration_s < 0.0) {
      throw Error(ErrorCode::MalformedResponse, "negative distance or duration");
    }
    return route;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::MalformedResponse, e.what());
  }
}

ExternalRouter::ExternalRouter(DirectionsEndpoint endpoint) : endpoint_(std::move(endpoint)) {}

Route ExternalRouter::fetch(const GeoPoint& from, const GeoPoint& to) {
  {
    std::scoped_lock lock(mu_);
    const auto now = std::chrono::steady_clock::now();
    if (last_call_ && now - *last_call_ < endpoint_.min_interval) {
      throw Error(ErrorCode::RateLimited, "local rate limit for directions endpoint");
    }
    last_call_ = now;
  }

  httplib::Client client(endpoint_.base_url);
  if (!client.is_valid()) throw Error(ErrorCode::NetworkFailure, "invalid directions endpoint URL");
  const auto secs = std::chrono::duration_cast<std::chrono::seconds>(endpoint_.timeout);
  const auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(endpoint_.timeout - secs);
  client.set_connection_timeout(secs.count(), usecs.count());
  client.set_read_timeout(secs.count(), usecs.count());

  httplib::Headers headers{{"Accept", "application/geo+json, application/json"}};
  if (!endpoint_.api_key.empty()) headers.emplace("Authorization", endpoint_.api_key);

  const auto target = endpoint_.path + "/" + endpoint_.profile + "/geojson";
  auto res = client.Post(target, headers, build_directions_request(from, to), "application/json");
  if (!res) throw Error(ErrorCode::NetworkFailure, httplib::to_string(res.error()));
  if (res->status == 429) throw Error(ErrorCode::RateLimited, "directions endpoint returned 429");
  if (res->status != 200) {
    throw Error(ErrorCode::NetworkFailure, "directions endpoint returned HTTP " + std::to_string(res->status));
  }
  return parse_directions_response(res->body);
}

RouteResult fetch_external_route(ExternalRouter* router, const RoadGraph& graph, const GeoPoint& from,
                                 const GeoPoint& to, double snap_radius_m, double speed_mps) {
  RouteResult result;
  if (router != nullptr) {
    try {
      result.route = router->fetch(from, to);
      result.external = true;
      return result;
    } catch (const Error& e) {
      spdlog::warn("external routing failed ({}): {}; using local router", to_string(e.code()), e.what());
      result.failure = e.code();
    }
  }
  const auto a = snap_to_graph(from, graph, snap_radius_m);
  const auto b = snap_to_graph(to, graph, snap_radius_m);
  result.route = shortest_route(graph, a, b, speed_mps);
  return result;
}

}  // namespace campusride::geo
