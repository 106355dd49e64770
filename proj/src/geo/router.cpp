#include "campusride/geo/router.hpp"

#include <cmath>
#include <functional>
#include <limits>
#include <queue>

#include <fmt/format.h>

#include "campusride/domain/error.hpp"
#include "campusride/geo/haversine.hpp"

namespace campusride::geo {

NodeId snap_to_graph(const GeoPoint& p, const RoadGraph& graph, double snap_radius_m) {
  if (graph.empty()) throw Error(ErrorCode::GraphInvalid, "cannot snap onto an empty graph");
  std::size_t best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < graph.size(); ++i) {
    const double d = haversine_distance(p, graph.position_at(i));
    if (d < best_d || (d == best_d && graph.id_at(i) < graph.id_at(best))) {
      best = i;
      best_d = d;
    }
  }
  if (best_d > snap_radius_m) {
    throw Error(ErrorCode::SnapTooFar,
                fmt::format("nearest node {} is {:.1f} m away (limit {:.1f} m)", graph.id_at(best).str(), best_d,
                            snap_radius_m));
  }
  return graph.id_at(best);
}

namespace {

// Distances to `target` over reversed arcs.
std::vector<double> distances_to(const RoadGraph& graph, std::size_t target) {
  std::vector<double> dist(graph.size(), std::numeric_limits<double>::infinity());
  using Item = std::pair<double, std::size_t>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> frontier;
  dist[target] = 0.0;
  frontier.emplace(0.0, target);
  while (!frontier.empty()) {
    const auto [d, u] = frontier.top();
    frontier.pop();
    if (d > dist[u]) continue;
    for (const auto& arc : graph.in_arcs(u)) {
      const double candidate = d + arc.length_m;
      if (candidate < dist[arc.to]) {
        dist[arc.to] = candidate;
        frontier.emplace(candidate, arc.to);
      }
    }
  }
  return dist;
}

bool same_cost(double a, double b) { return std::abs(a - b) <= 1e-9 * std::max({1.0, std::abs(a), std::abs(b)}); }

}  // namespace

Route shortest_route(const RoadGraph& graph, const NodeId& from, const NodeId& to, double speed_mps) {
  const auto src = graph.index_of(from);
  const auto dst = graph.index_of(to);
  if (!src) throw Error(ErrorCode::UnknownNode, fmt::format("unknown node {}", from.str()));
  if (!dst) throw Error(ErrorCode::UnknownNode, fmt::format("unknown node {}", to.str()));

  const auto dist = distances_to(graph, *dst);
  if (!std::isfinite(dist[*src])) {
    throw Error(ErrorCode::Unreachable, fmt::format("no path from {} to {}", from.str(), to.str()));
  }

  // With every distance-to-target known, walking forward and always taking the
  // smallest-id neighbour that stays on a shortest path yields the
  // lexicographically smallest optimal node sequence.
  Route route;
  std::size_t u = *src;
  route.node_path.push_back(graph.id_at(u));
  route.polyline.push_back(graph.position_at(u));
  while (u != *dst) {
    std::optional<Arc> pick;
    for (const auto& arc : graph.out_arcs(u)) {
      if (!std::isfinite(dist[arc.to]) || !same_cost(dist[u], arc.length_m + dist[arc.to])) continue;
      if (!pick || graph.id_at(arc.to) < graph.id_at(pick->to) ||
          (arc.to == pick->to && arc.length_m < pick->length_m)) {
        pick = arc;
      }
    }
    if (!pick) throw Error(ErrorCode::Unreachable, "inconsistent distance labels");
    route.distance_m += pick->length_m;
    u = pick->to;
    route.node_path.push_back(graph.id_at(u));
    route.polyline.push_back(graph.position_at(u));
  }
  if (route.polyline.size() == 1) route.polyline.push_back(route.polyline.front());
  route.duration_s = route.distance_m / speed_mps;
  return route;
}

std::int64_t estimate_eta(const Route& route, double speed_mps) {
  const double seconds = route.distance_m / speed_mps;
  // Absorb representation noise so exact multiples do not round up a second.
  return static_cast<std::int64_t>(std::ceil(seconds - 1e-9));
}

}  // namespace campusride::geo
