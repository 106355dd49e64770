#include "campusride/geo/reroute.hpp"

#include <algorithm>
#include <limits>

#include "campusride/geo/haversine.hpp"

namespace campusride::geo {

double deviation_from_route(const GeoPoint& pos, const Route& route) noexcept {
  const auto& line = route.polyline;
  if (line.empty()) return std::numeric_limits<double>::infinity();
  if (line.size() == 1) return haversine_distance(pos, line.front());
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 1; i < line.size(); ++i) {
    best = std::min(best, point_segment_distance(pos, line[i - 1], line[i]));
  }
  return best;
}

bool should_reroute(const GeoPoint& pos, const Route& route, double threshold_m) noexcept {
  return deviation_from_route(pos, route) > threshold_m;
}

}  // namespace campusride::geo
