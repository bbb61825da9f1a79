#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "dslake/core/error.hpp"
#include "dslake/core/random.hpp"
#include "dslake/core/region.hpp"
#include "dslake/core/text.hpp"
#include "dslake/cyclone/geo.hpp"
#include "dslake/cyclone/grid.hpp"
#include "dslake/cyclone/track.hpp"
#include "dslake/storage/layout.hpp"

namespace dslake::cyclone {

/// A depression moving at constant speed along a great circle.
struct PlantedCyclone {
  TimePoint t_start;
  TimePoint t_end;
  LatLon start;
  double bearing = 0;    // initial great-circle bearing, degrees
  double speed_kmh = 0;
  double depth = 0;      // hPa below background at the center
  double sigma_km = 300;

  LatLon position(TimePoint t) const { return destination(start, bearing, speed_kmh * hours_between(t_start, t)); }
  bool active(TimePoint t) const { return t >= t_start && t <= t_end; }

  friend bool operator==(const PlantedCyclone&, const PlantedCyclone&) = default;
};

struct SyntheticSpec {
  std::string dataset = "synthetic";
  GeoBox area{48.3416, -24.7851, 66.1605, 32.8710};
  TimeRange time{make_time(2011, 1, 1), make_time(2011, 12, 31)};
  int step_hours = 6;
  double spacing = 0.5;
  double background = 1013.25;
  std::vector<PlantedCyclone> cyclones;
  int random_count = 0;                // cyclones drawn from the seed
  std::vector<Sector> random_sectors;  // sectors of the first random cyclones; the rest avoid them
};

struct TruthPath {
  PlantedCyclone planted;
  Sector sector = Sector::North;
  std::vector<std::pair<TimePoint, LatLon>> centers;  // true position at each snapshot
};

struct GroundTruth {
  std::vector<TruthPath> paths;

  std::size_t count(Sector s) const {
    return static_cast<std::size_t>(
        std::count_if(paths.begin(), paths.end(), [&](const TruthPath& p) { return p.sector == s; }));
  }

  std::string canonical() const {
    std::string out = "TRUTH " + std::to_string(paths.size()) + "\n";
    for (std::size_t i = 0; i < paths.size(); ++i) {
      const auto& p = paths[i];
      const auto& c = p.planted;
      out += "cyclone " + std::to_string(i) + "\n";
      out += "  start " + format_iso8601(c.t_start) + "\n";
      out += "  end " + format_iso8601(c.t_end) + "\n";
      out += "  origin " + format_fixed4(c.start.lat) + " " + format_fixed4(c.start.lon) + "\n";
      out += "  bearing " + format_fixed4(c.bearing) + "\n";
      out += "  sector " + std::string(sector_name(p.sector)) + "\n";
      out += "  speed " + format_fixed4(c.speed_kmh) + "\n";
      out += "  depth " + format_fixed4(c.depth) + "\n";
      out += "  sigma " + format_fixed4(c.sigma_km) + "\n";
      for (const auto& [t, ll] : p.centers)
        out += "  center " + format_iso8601(t) + " " + format_fixed4(ll.lat) + " " + format_fixed4(ll.lon) + "\n";
    }
    return out;
  }
};

struct SyntheticDataset {
  std::vector<storage::DataFile> files;
  GroundTruth truth;
};

/// Grid origin and size covering `area` at `spacing`.
struct GridFrame {
  double lat0, lon0;
  int nlat, nlon;
};

inline GridFrame grid_frame(const GeoBox& area, double spacing) {
  GridFrame f;
  f.lat0 = std::floor(area.south / spacing) * spacing;
  f.lon0 = std::floor(area.west / spacing) * spacing;
  f.nlat = static_cast<int>(std::ceil((area.north - f.lat0) / spacing)) + 1;
  f.nlon = static_cast<int>(std::ceil((area.east - f.lon0) / spacing)) + 1;
  return f;
}

inline std::vector<TimePoint> snapshot_times(const SyntheticSpec& s) {
  std::vector<TimePoint> out;
  for (TimePoint t = s.time.begin(); t < s.time.end(); t += std::chrono::hours{s.step_hours}) out.push_back(t);
  return out;
}

namespace detail {

[[noreturn]] inline void spec_fail(const std::string& msg) { throw Error(Errc::SpecError, msg); }

inline void check_spec(const SyntheticSpec& s) {
  const auto& a = s.area;
  if (!(a.south < a.north) || !(a.west < a.east) || a.south < -90 || a.north > 90 || a.west < -180 || a.east > 180)
    spec_fail("area must be a non-empty box inside [-90, 90] x [-180, 180]");
  if (!(s.spacing > 0) || s.spacing > 10) spec_fail("grid spacing must be in (0, 10] degrees");
  if (s.step_hours < 1) spec_fail("step must be at least one hour");
  if (s.time.last < s.time.first) spec_fail("time range ends before it starts");
  if (s.background < kMinPressure || s.background > kMaxPressure) spec_fail("background pressure out of range");
  if (s.random_count < 0 || static_cast<std::size_t>(s.random_count) < s.random_sectors.size())
    spec_fail("random count must cover the listed sectors");
  const auto f = grid_frame(s.area, s.spacing);
  if (f.lat0 + (f.nlat - 1) * s.spacing > 90 || f.lon0 + (f.nlon - 1) * s.spacing > 180)
    spec_fail("grid does not fit inside the globe at this spacing");
  for (const auto& c : s.cyclones) {
    if (c.t_end < c.t_start) spec_fail("cyclone ends before it starts");
    if (!(c.depth > 0) || s.background - c.depth < kMinPressure) spec_fail("cyclone depth out of range");
    if (!(c.sigma_km > 0)) spec_fail("cyclone sigma must be positive");
    if (c.speed_kmh < 0) spec_fail("cyclone speed must be non-negative");
  }
}

/// Centers more than three times the larger sigma apart at every snapshot
/// where both cyclones exist.
inline bool separated(const PlantedCyclone& a, const PlantedCyclone& b, const std::vector<TimePoint>& times) {
  const double need = 3.0 * std::max(a.sigma_km, b.sigma_km);
  for (const auto t : times)
    if (a.active(t) && b.active(t) && haversine(a.position(t), b.position(t)) <= need) return false;
  return true;
}

inline double field_at(const SyntheticSpec& s, const std::vector<const PlantedCyclone*>& active, TimePoint t,
                       LatLon x) {
  double sum = 0;
  for (const auto* c : active) {
    const double d = haversine(x, c->position(t));
    sum += c->depth * std::exp(-(d * d) / (2.0 * c->sigma_km * c->sigma_km));
  }
  return s.background - sum;
}

// Random cyclones are kept well inside the area and away from sector
// boundaries, and isolated enough in space and time that tracking cannot
// join two of them.
inline constexpr double kEdgeMarginDeg = 1.5;
inline constexpr double kSectorMarginDeg = 8.0;
inline constexpr double kTrackGuardKm = 150.0;  // beyond the tracking gate

inline bool isolated(const PlantedCyclone& a, const PlantedCyclone& b, const std::vector<TimePoint>& times,
                     int step_hours) {
  const auto step = std::chrono::hours{step_hours};
  const double need =
      std::max(3.0 * std::max(a.sigma_km, b.sigma_km), kDefaultMaxSpeedKmh * step_hours + kTrackGuardKm);
  const TimePoint lo = std::max(a.t_start, b.t_start) - step;
  const TimePoint hi = std::min(a.t_end, b.t_end) + step;
  for (const auto t : times) {
    if (t < lo || t > hi) continue;
    const TimePoint ta = std::clamp(t, a.t_start, a.t_end);
    const TimePoint tb = std::clamp(t, b.t_start, b.t_end);
    if (haversine(a.position(ta), b.position(tb)) <= need) return false;
  }
  return true;
}

inline PlantedCyclone draw_cyclone(const SyntheticSpec& s, const std::vector<TimePoint>& times, Sector sector,
                                   SplitMix64& rng) {
  const GeoBox inner{s.area.south + kEdgeMarginDeg, s.area.west + kEdgeMarginDeg, s.area.north - kEdgeMarginDeg,
                     s.area.east - kEdgeMarginDeg};
  if (!(inner.south < inner.north) || !(inner.west < inner.east)) spec_fail("area too small for random cyclones");
  const int min_steps = std::max(1, 48 / s.step_hours);
  const int max_steps = std::max(min_steps, 96 / s.step_hours);
  if (static_cast<int>(times.size()) <= max_steps + 2) spec_fail("time range too short for random cyclones");

  PlantedCyclone c;
  const int steps = min_steps + static_cast<int>(rng.below(static_cast<std::uint64_t>(max_steps - min_steps + 1)));
  const auto first = 1 + rng.below(times.size() - static_cast<std::size_t>(steps) - 2);
  c.t_start = times[first];
  c.t_end = times[first + static_cast<std::size_t>(steps)];
  c.speed_kmh = rng.uniform(20.0, 35.0);
  c.depth = rng.uniform(25.0, 60.0);
  c.sigma_km = rng.uniform(200.0, 320.0);
  const double half = 22.5 - kSectorMarginDeg;
  c.bearing = wrap_degrees(45.0 * static_cast<int>(sector) + rng.uniform(-half, half));
  c.start = {rng.uniform(inner.south, inner.north), rng.uniform(inner.west, inner.east)};
  return c;
}

inline bool inside_all(const PlantedCyclone& c, const GeoBox& inner, const std::vector<TimePoint>& times) {
  for (const auto t : times)
    if (c.active(t)) {
      const auto p = c.position(t);
      if (!inner.contains(p.lat, p.lon)) return false;
    }
  return true;
}

}  // namespace detail

/// Builds the snapshot files and the ground truth. Explicit cyclones must be
/// separated by more than three times the larger sigma whenever both exist;
/// random ones are drawn by rejection under stricter isolation rules.
inline SyntheticDataset generate_synthetic(const SyntheticSpec& spec, std::uint64_t seed) {
  detail::check_spec(spec);
  const auto times = snapshot_times(spec);

  std::vector<PlantedCyclone> all = spec.cyclones;
  for (std::size_t a = 0; a < all.size(); ++a)
    for (std::size_t b = a + 1; b < all.size(); ++b)
      if (!detail::separated(all[a], all[b], times))
        detail::spec_fail("cyclones " + std::to_string(a) + " and " + std::to_string(b) + " overlap");

  if (spec.random_count > 0) {
    SplitMix64 rng(seed);
    const std::set<Sector> listed(spec.random_sectors.begin(), spec.random_sectors.end());
    std::vector<Sector> others;
    for (int k = 0; k < 8; ++k)
      if (!listed.count(static_cast<Sector>(k))) others.push_back(static_cast<Sector>(k));
    if (others.empty())
      for (int k = 0; k < 8; ++k) others.push_back(static_cast<Sector>(k));
    const GeoBox inner{spec.area.south + detail::kEdgeMarginDeg, spec.area.west + detail::kEdgeMarginDeg,
                       spec.area.north - detail::kEdgeMarginDeg, spec.area.east - detail::kEdgeMarginDeg};
    for (int r = 0; r < spec.random_count; ++r) {
      const Sector sector = static_cast<std::size_t>(r) < spec.random_sectors.size()
                                ? spec.random_sectors[static_cast<std::size_t>(r)]
                                : others[rng.below(others.size())];
      bool placed = false;
      for (int attempt = 0; attempt < 20000 && !placed; ++attempt) {
        auto c = detail::draw_cyclone(spec, times, sector, rng);
        if (!detail::inside_all(c, inner, times)) continue;
        if (!std::all_of(all.begin(), all.end(),
                         [&](const PlantedCyclone& o) { return detail::isolated(c, o, times, spec.step_hours); }))
          continue;
        all.push_back(c);
        placed = true;
      }
      if (!placed) detail::spec_fail("could not place random cyclone " + std::to_string(r));
    }
  }

  SyntheticDataset out;
  for (const auto& c : all) {
    TruthPath tp;
    tp.planted = c;
    tp.sector = classify_direction(c.bearing);
    for (const auto t : times)
      if (c.active(t)) tp.centers.emplace_back(t, c.position(t));
    out.truth.paths.push_back(std::move(tp));
  }

  const auto f = grid_frame(spec.area, spec.spacing);
  GridSnapshot g;
  g.lat0 = f.lat0;
  g.lon0 = f.lon0;
  g.dlat = g.dlon = spec.spacing;
  g.nlat = f.nlat;
  g.nlon = f.nlon;
  g.values.assign(static_cast<std::size_t>(f.nlat) * f.nlon, spec.background);

  // Snapshots without an active cyclone share one body.
  std::string uniform = format_grid_snapshot(g);
  uniform.erase(0, uniform.find('\n') + 1);

  out.files.reserve(times.size());
  for (const auto t : times) {
    std::vector<const PlantedCyclone*> active;
    for (const auto& c : all)
      if (c.active(t)) active.push_back(&c);
    g.timestamp = t;
    std::string text;
    if (active.empty()) {
      text = "grid " + format_shortest(g.lat0) + " " + format_shortest(g.lon0) + " " + format_shortest(g.dlat) + " " +
             format_shortest(g.dlon) + " " + std::to_string(g.nlat) + " " + std::to_string(g.nlon) + " " +
             format_iso8601(t) + "\n" + uniform;
    } else {
      for (int i = 0; i < g.nlat; ++i)
        for (int j = 0; j < g.nlon; ++j) g.at(i, j) = detail::field_at(spec, active, t, {g.lat(i), g.lon(j)});
      text = format_grid_snapshot(g);
      std::fill(g.values.begin(), g.values.end(), spec.background);
    }
    out.files.emplace_back(spec.dataset, t, t, std::move(text));
  }
  return out;
}

/// Reads a synthetic spec file:
///
///   dataset <name>
///   area <south> <west> <north> <east>
///   time <dd.mm.yyyy> <dd.mm.yyyy>
///   step <hours>
///   spacing <degrees>
///   background <hPa>
///   random <count> [<sector> ...]
///   cyclone <start ISO> <end ISO> <lat> <lon> <bearing> <speed km/h> <depth hPa> <sigma km>
inline SyntheticSpec parse_synthetic_spec(std::string_view text) {
  SyntheticSpec s;
  for_each_line(text, [&](int lineno, std::string_view raw) {
    const auto line = trim(raw);
    if (line.empty() || line.front() == '#') return;
    const auto f = split_ws(line);
    auto fail = [&](const std::string& msg) { return FormatError(lineno, msg, Errc::SpecError); };
    auto num = [&](std::size_t i) {
      const auto v = parse_double(f[i]);
      if (!v) throw fail("'" + std::string(f[i]) + "' is not a number");
      return *v;
    };
    auto integer = [&](std::size_t i) {
      const auto v = parse_int(f[i]);
      if (!v) throw fail("'" + std::string(f[i]) + "' is not an integer");
      return *v;
    };
    auto want = [&](std::size_t n) {
      if (f.size() != n + 1) throw fail("'" + std::string(f[0]) + "' takes " + std::to_string(n) + " values");
    };
    const auto key = f[0];
    if (key == "dataset") {
      want(1);
      s.dataset = std::string(f[1]);
    } else if (key == "area") {
      want(4);
      s.area = GeoBox{num(1), num(2), num(3), num(4)};
    } else if (key == "time") {
      want(2);
      const auto a = parse_dmy(f[1]), b = parse_dmy(f[2]);
      if (!a || !b) throw fail("time takes two dd.mm.yyyy dates");
      s.time = TimeRange{*a, *b};
    } else if (key == "step") {
      want(1);
      const auto v = integer(1);
      if (v < 1 || v > 24 * 366) throw fail("step out of range");
      s.step_hours = static_cast<int>(v);
    } else if (key == "spacing") {
      want(1);
      s.spacing = num(1);
    } else if (key == "background") {
      want(1);
      s.background = num(1);
    } else if (key == "random") {
      if (f.size() < 2) throw fail("random takes a count and optional sectors");
      const auto v = integer(1);
      if (v < 0 || v > 1000) throw fail("random count out of range");
      s.random_count = static_cast<int>(v);
      s.random_sectors.clear();
      for (std::size_t i = 2; i < f.size(); ++i) {
        const auto sec = parse_sector(f[i]);
        if (!sec) throw fail("unknown sector '" + std::string(f[i]) + "'");
        s.random_sectors.push_back(*sec);
      }
    } else if (key == "cyclone") {
      want(8);
      const auto t0 = parse_iso8601(f[1]), t1 = parse_iso8601(f[2]);
      if (!t0 || !t1) throw fail("cyclone times must be ISO-8601");
      s.cyclones.push_back(PlantedCyclone{*t0, *t1, {num(3), num(4)}, num(5), num(6), num(7), num(8)});
    } else {
      throw fail("unknown key '" + std::string(key) + "'");
    }
  });
  return s;
}

}  // namespace dslake::cyclone
