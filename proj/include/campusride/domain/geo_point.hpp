#pragma once

namespace campusride {

/// WGS84 coordinate in degrees.
struct GeoPoint {
  double lat{};
  double lon{};

  bool operator==(const GeoPoint&) const = default;
};

/// Finite, lat in [-90, 90], lon in [-180, 180].
[[nodiscard]] bool is_valid(const GeoPoint& p) noexcept;

/// Throws Error{InvalidArgument} when out of range.
[[nodiscard]] GeoPoint make_geo_point(double lat, double lon);

}  // namespace campusride
