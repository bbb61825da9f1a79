#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <string>

#include "dslake/core/error.hpp"
#include "dslake/core/value.hpp"
#include "dslake/cyclone/geo.hpp"
#include "dslake/cyclone/grid.hpp"
#include "dslake/cyclone/track.hpp"

namespace dslake::cyclone {

inline constexpr double kWindowHalfDeg = 5.0;  // 10 x 10 degree window
inline constexpr int kDefaultDensify = 4;
inline constexpr double kRadiusFraction = 0.75;

struct CycloneParams {
  TimePoint start_time;
  TimePoint end_time;
  double central_pressure = 0;
  double ambient_pressure = 0;
  double depth = 0;  // ambient - central
  double radius_km = 0;
  double mean_speed_kmh = 0;
  std::optional<double> average_bearing;  // none for paths that do not move
  std::optional<Sector> direction;
  std::int64_t length = 0;

  friend bool operator==(const CycloneParams&, const CycloneParams&) = default;
};

/// Coarse half-width (in cells) a patch needs so that the dense window of
/// any factor fits inside it.
inline int window_patch_half(double dlat, double dlon) {
  return static_cast<int>(std::ceil(kWindowHalfDeg / std::min(dlat, dlon))) + 1;
}

/// Parameters of a path. `last` must cover the window around the final
/// center; `k` is the densification factor.
inline CycloneParams parametrize(const CyclonePath& path, const GridPatch& last, int k = kDefaultDensify) {
  if (path.centers.empty()) throw Error(Errc::CombinerFailure, "cannot parametrize an empty path");
  if (k < 1) throw Error(Errc::ConfigError, "densify factor must be at least 1");
  const auto& first = path.centers.front();
  const auto& end = path.centers.back();
  if (!last.covers(end.i, end.j) || last.timestamp != end.timestamp)
    throw Error(Errc::CombinerFailure, "snapshot window does not contain the final center");

  CycloneParams p;
  p.start_time = first.timestamp;
  p.end_time = end.timestamp;
  p.length = static_cast<std::int64_t>(path.centers.size());

  const int hi = static_cast<int>(std::lround(kWindowHalfDeg * k / last.dlat));
  const int hj = static_cast<int>(std::lround(kWindowHalfDeg * k / last.dlon));
  const int ic = end.i * k, jc = end.j * k;
  const int I0 = std::max({0, ic - hi, last.i0 * k});
  const int I1 = std::min({(last.parent_nlat - 1) * k, ic + hi, (last.i0 + last.ni - 1) * k});
  const int J0 = std::max({0, jc - hj, last.j0 * k});
  const int J1 = std::min({(last.parent_nlon - 1) * k, jc + hj, (last.j0 + last.nj - 1) * k});

  const int w = J1 - J0 + 1;
  std::vector<double> win(static_cast<std::size_t>(I1 - I0 + 1) * w);
  double central = std::numeric_limits<double>::infinity();
  double ambient = -std::numeric_limits<double>::infinity();
  for (int I = I0; I <= I1; ++I)
    for (int J = J0; J <= J1; ++J) {
      const double v = dense_value(last, k, I, J);
      win[static_cast<std::size_t>(I - I0) * w + (J - J0)] = v;
      central = std::min(central, v);
      if (I == I0 || I == I1 || J == J0 || J == J1) ambient = std::max(ambient, v);
    }
  p.central_pressure = central;
  p.ambient_pressure = ambient;
  p.depth = ambient - central;

  const double contour = central + kRadiusFraction * p.depth;
  const LatLon c{end.lat, end.lon};
  double radius = std::numeric_limits<double>::infinity();
  for (int I = I0; I <= I1; ++I)
    for (int J = J0; J <= J1; ++J) {
      if (I == ic && J == jc) continue;
      if (win[static_cast<std::size_t>(I - I0) * w + (J - J0)] < contour) continue;
      radius = std::min(radius, haversine(c, {dense_lat(last, k, I), dense_lon(last, k, J)}));
    }
  p.radius_km = std::isfinite(radius) ? radius : 0.0;

  double length_km = 0;
  for (std::size_t s = 1; s < path.centers.size(); ++s) {
    const auto& a = path.centers[s - 1];
    const auto& b = path.centers[s];
    length_km += haversine({a.lat, a.lon}, {b.lat, b.lon});
  }
  const double hours = hours_between(p.start_time, p.end_time);
  p.mean_speed_kmh = hours > 0 ? length_km / hours : 0.0;

  if (path.centers.size() > 1) {
    try {
      p.average_bearing = initial_bearing({first.lat, first.lon}, {end.lat, end.lon});
      p.direction = classify_direction(*p.average_bearing);
    } catch (const Error&) {
      // returned to its starting point: no direction
    }
  }
  return p;
}

inline std::string direction_text(const CycloneParams& p) {
  return p.direction ? std::string(sector_name(*p.direction)) : std::string("none");
}

/// The composite `Params` value; field names match the object parameters.
inline Record to_record(const CycloneParams& p) {
  Record r;
  r.fields["StartTime"] = p.start_time;
  r.fields["EndTime"] = p.end_time;
  r.fields["CentralPressure"] = p.central_pressure;
  r.fields["AmbientPressure"] = p.ambient_pressure;
  r.fields["Depth"] = p.depth;
  r.fields["Radius"] = p.radius_km;
  r.fields["MeanSpeed"] = p.mean_speed_kmh;
  r.fields["AverageBearing"] = p.average_bearing ? Scalar{*p.average_bearing} : Scalar{None{}};
  r.fields["Direction"] = direction_text(p);
  r.fields["Length"] = p.length;
  return r;
}

inline CycloneParams from_record(const Record& r) {
  auto field = [&](const char* name) -> const Scalar& {
    const auto it = r.fields.find(name);
    if (it == r.fields.end()) throw Error(Errc::BindingError, std::string("cyclone record lacks field ") + name);
    return it->second;
  };
  auto number = [&](const char* name) {
    const auto& s = field(name);
    if (const auto* d = std::get_if<double>(&s)) return *d;
    if (const auto* i = std::get_if<std::int64_t>(&s)) return static_cast<double>(*i);
    throw Error(Errc::BindingError, std::string("cyclone field ") + name + " is not numeric");
  };
  auto time = [&](const char* name) {
    const auto* t = std::get_if<TimePoint>(&field(name));
    if (!t) throw Error(Errc::BindingError, std::string("cyclone field ") + name + " is not a time");
    return *t;
  };
  CycloneParams p;
  p.start_time = time("StartTime");
  p.end_time = time("EndTime");
  p.central_pressure = number("CentralPressure");
  p.ambient_pressure = number("AmbientPressure");
  p.depth = number("Depth");
  p.radius_km = number("Radius");
  p.mean_speed_kmh = number("MeanSpeed");
  if (!std::holds_alternative<None>(field("AverageBearing"))) {
    p.average_bearing = number("AverageBearing");
    p.direction = classify_direction(*p.average_bearing);
  }
  const auto& len = field("Length");
  if (const auto* i = std::get_if<std::int64_t>(&len)) p.length = *i;
  else throw Error(Errc::BindingError, "cyclone field Length is not an integer");
  return p;
}

/// Output parameters of a cyclone-path object.
inline std::map<std::string, TypedValue> object_params(const CycloneParams& p) {
  std::map<std::string, TypedValue> m;
  m["Params"] = {"cyclone-params", to_record(p)};
  m["StartTime"] = {"datetime", p.start_time};
  m["EndTime"] = {"datetime", p.end_time};
  m["CentralPressure"] = {"hpa", p.central_pressure};
  m["AmbientPressure"] = {"hpa", p.ambient_pressure};
  m["Depth"] = {"hpa", p.depth};
  m["Radius"] = {"km", p.radius_km};
  m["MeanSpeed"] = {"kmh", p.mean_speed_kmh};
  m["AverageBearing"] = {"degrees", p.average_bearing ? Value{*p.average_bearing} : Value{None{}}};
  m["Direction"] = {"sector", direction_text(p)};
  m["Length"] = {"int", p.length};
  return m;
}

}  // namespace dslake::cyclone
