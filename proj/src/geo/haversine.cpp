#include "campusride/geo/haversine.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace campusride::geo {

namespace {

constexpr double kDegToRad = std::numbers::pi / 180.0;

double wrap_degrees(double d) noexcept {
  while (d > 180.0) d -= 360.0;
  while (d < -180.0) d += 360.0;
  return d;
}

}  // namespace

double haversine_distance(const GeoPoint& a, const GeoPoint& b) noexcept {
  const double phi1 = a.lat * kDegToRad;
  const double phi2 = b.lat * kDegToRad;
  const double dphi = (b.lat - a.lat) * kDegToRad;
  const double dlambda = (b.lon - a.lon) * kDegToRad;
  const double s1 = std::sin(dphi / 2.0);
  const double s2 = std::sin(dlambda / 2.0);
  const double h = s1 * s1 + std::cos(phi1) * std::cos(phi2) * s2 * s2;
  return 2.0 * kEarthRadiusM * std::asin(std::min(1.0, std::sqrt(h)));
}

double polyline_length(std::span<const GeoPoint> points) noexcept {
  double total = 0.0;
  for (std::size_t i = 1; i < points.size(); ++i) total += haversine_distance(points[i - 1], points[i]);
  return total;
}

double point_segment_distance(const GeoPoint& p, const GeoPoint& a, const GeoPoint& b) noexcept {
  const double kx = kEarthRadiusM * kDegToRad * std::cos(p.lat * kDegToRad);
  const double ky = kEarthRadiusM * kDegToRad;
  const double ax = wrap_degrees(a.lon - p.lon) * kx;
  const double ay = (a.lat - p.lat) * ky;
  const double bx = wrap_degrees(b.lon - p.lon) * kx;
  const double by = (b.lat - p.lat) * ky;

  const double dx = bx - ax;
  const double dy = by - ay;
  const double len2 = dx * dx + dy * dy;
  double t = 0.0;
  if (len2 > 0.0) t = std::clamp(-(ax * dx + ay * dy) / len2, 0.0, 1.0);
  return std::hypot(ax + t * dx, ay + t * dy);
}

GeoPoint interpolate(const GeoPoint& a, const GeoPoint& b, double t) noexcept {
  return GeoPoint{a.lat + (b.lat - a.lat) * t, a.lon + (b.lon - a.lon) * t};
}

}  // namespace campusride::geo
