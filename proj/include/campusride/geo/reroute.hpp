#pragma once

#include "campusride/geo/router.hpp"

namespace campusride::geo {

inline constexpr double kDefaultRerouteThresholdM = 30.0;

/// Minimum distance from pos to any segment of the route polyline.
[[nodiscard]] double deviation_from_route(const GeoPoint& pos, const Route& route) noexcept;

/// True iff the deviation strictly exceeds threshold_m.
[[nodiscard]] bool should_reroute(const GeoPoint& pos, const Route& route, double threshold_m) noexcept;

}  // namespace campusride::geo
