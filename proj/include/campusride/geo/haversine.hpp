#pragma once

#include <span>

#include "campusride/domain/geo_point.hpp"

namespace campusride::geo {

inline constexpr double kEarthRadiusM = 6'371'000.0;

/// Great-circle distance in meters on a sphere of mean Earth radius.
[[nodiscard]] double haversine_distance(const GeoPoint& a, const GeoPoint& b) noexcept;

/// Sum of consecutive haversine lengths.
[[nodiscard]] double polyline_length(std::span<const GeoPoint> points) noexcept;

/// Distance in meters from p to the segment a-b, measured in an
/// equirectangular tangent plane centred on p. Accurate to well under a
/// meter at campus scale (segments of a few hundred meters).
[[nodiscard]] double point_segment_distance(const GeoPoint& p, const GeoPoint& a, const GeoPoint& b) noexcept;

/// Point at fraction t in [0, 1] along a-b, interpolated linearly in lat/lon.
[[nodiscard]] GeoPoint interpolate(const GeoPoint& a, const GeoPoint& b, double t) noexcept;

}  // namespace campusride::geo
