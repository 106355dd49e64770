#pragma once

#include <cstdint>
#include <vector>

#include "campusride/domain/geo_point.hpp"
#include "campusride/domain/ids.hpp"
#include "campusride/geo/road_graph.hpp"

namespace campusride::geo {

inline constexpr double kCampusSpeedMps = 5.0;
inline constexpr double kSnapRadiusM = 500.0;

struct Route {
  std::vector<GeoPoint> polyline;  // at least two points
  double distance_m{};
  double duration_s{};
  std::vector<NodeId> node_path;  // empty for externally sourced routes

  bool operator==(const Route&) const = default;
};

/// Nearest node by haversine distance, ties to the smaller id.
/// Throws SnapTooFar when the nearest node lies beyond `snap_radius_m`.
[[nodiscard]] NodeId snap_to_graph(const GeoPoint& p, const RoadGraph& graph, double snap_radius_m = kSnapRadiusM);

/// Dijkstra. Among equal-cost paths the lexicographically smallest node
/// sequence is returned. Throws UnknownNode or Unreachable.
[[nodiscard]] Route shortest_route(const RoadGraph& graph, const NodeId& from, const NodeId& to,
                                   double speed_mps = kCampusSpeedMps);

/// Whole seconds, rounded up.
[[nodiscard]] std::int64_t estimate_eta(const Route& route, double speed_mps = kCampusSpeedMps);

}  // namespace campusride::geo
