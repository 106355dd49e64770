#include "campusride/domain/geo_point.hpp"

#include <cmath>

#include <fmt/format.h>

#include "campusride/domain/error.hpp"

namespace campusride {

bool is_valid(const GeoPoint& p) noexcept {
  return std::isfinite(p.lat) && std::isfinite(p.lon) && p.lat >= -90.0 && p.lat <= 90.0 &&
         p.lon >= -180.0 && p.lon <= 180.0;
}

GeoPoint make_geo_point(double lat, double lon) {
  GeoPoint p{lat, lon};
  if (!is_valid(p)) {
    throw Error(ErrorCode::InvalidArgument, fmt::format("coordinate ({}, {}) out of range", lat, lon));
  }
  return p;
}

}  // namespace campusride
