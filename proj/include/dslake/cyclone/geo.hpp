#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <optional>
#include <string>
#include <string_view>

#include "dslake/core/error.hpp"

namespace dslake::cyclone {

inline constexpr double kEarthRadiusKm = 6371.0;
inline constexpr double kPi = 3.14159265358979323846;

struct LatLon {
  double lat = 0;
  double lon = 0;
  friend bool operator==(const LatLon&, const LatLon&) = default;
};

inline double deg2rad(double d) { return d * kPi / 180.0; }
inline double rad2deg(double r) { return r * 180.0 / kPi; }

inline double wrap_degrees(double d) {
  double w = std::fmod(d, 360.0);
  if (w < 0) w += 360.0;
  if (w >= 360.0) w -= 360.0;
  return w;
}

/// Great-circle distance in km on a sphere of radius 6371 km.
inline double haversine(LatLon a, LatLon b) {
  const double p1 = deg2rad(a.lat), p2 = deg2rad(b.lat);
  const double dp = p2 - p1, dl = deg2rad(b.lon - a.lon);
  const double h = std::sin(dp / 2) * std::sin(dp / 2) + std::cos(p1) * std::cos(p2) * std::sin(dl / 2) * std::sin(dl / 2);
  return 2.0 * kEarthRadiusKm * std::asin(std::min(1.0, std::sqrt(h)));
}

/// Initial great-circle bearing from a to b: 0 = north, clockwise, in [0, 360).
inline double initial_bearing(LatLon a, LatLon b) {
  if (a == b) throw Error(Errc::DegenerateBearing, "bearing between identical points");
  const double p1 = deg2rad(a.lat), p2 = deg2rad(b.lat);
  const double dl = deg2rad(b.lon - a.lon);
  const double y = std::sin(dl) * std::cos(p2);
  const double x = std::cos(p1) * std::sin(p2) - std::sin(p1) * std::cos(p2) * std::cos(dl);
  return wrap_degrees(rad2deg(std::atan2(y, x)));
}

/// Point reached after travelling `distance_km` from `start` along the great
/// circle that leaves it at `bearing_deg`.
inline LatLon destination(LatLon start, double bearing_deg, double distance_km) {
  const double d = distance_km / kEarthRadiusKm;
  const double th = deg2rad(bearing_deg);
  const double p1 = deg2rad(start.lat), l1 = deg2rad(start.lon);
  const double p2 = std::asin(std::sin(p1) * std::cos(d) + std::cos(p1) * std::sin(d) * std::cos(th));
  const double l2 = l1 + std::atan2(std::sin(th) * std::sin(d) * std::cos(p1), std::cos(d) - std::sin(p1) * std::sin(p2));
  double lon = rad2deg(l2);
  lon = std::fmod(lon + 540.0, 360.0) - 180.0;
  return {rad2deg(p2), lon};
}

enum class Sector { North, NorthEast, East, SouthEast, South, SouthWest, West, NorthWest };

inline constexpr std::array<std::string_view, 8> kSectorNames = {
    "north", "north-east", "east", "south-east", "south", "south-west", "west", "north-west"};

inline std::string_view sector_name(Sector s) { return kSectorNames[static_cast<std::size_t>(s)]; }

inline std::optional<Sector> parse_sector(std::string_view name) {
  for (std::size_t i = 0; i < kSectorNames.size(); ++i)
    if (kSectorNames[i] == name) return static_cast<Sector>(i);
  return std::nullopt;
}

/// Eight 45° sectors centred on the compass points, half-open on the
/// clockwise side: north-east = [22.5, 67.5), north = [337.5, 360) ∪ [0, 22.5).
inline Sector classify_direction(double bearing_deg) {
  const double b = wrap_degrees(bearing_deg);
  const int idx = static_cast<int>(std::floor((b + 22.5) / 45.0)) % 8;
  return static_cast<Sector>(idx);
}

}  // namespace dslake::cyclone
