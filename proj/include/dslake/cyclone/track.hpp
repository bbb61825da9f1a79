#pragma once

#include <algorithm>
#include <span>
#include <string>
#include <tuple>
#include <vector>

#include "dslake/core/digest.hpp"
#include "dslake/core/error.hpp"
#include "dslake/cyclone/detect.hpp"
#include "dslake/cyclone/geo.hpp"

namespace dslake::cyclone {

inline constexpr double kDefaultMaxSpeedKmh = 120.0;

/// Centers detected in one snapshot.
struct CenterSet {
  TimePoint time;
  std::vector<CycloneCenter> centers;
};

struct CyclonePath {
  std::string path_id;  // digest of the ordered center list
  std::vector<CycloneCenter> centers;

  friend bool operator==(const CyclonePath&, const CyclonePath&) = default;
};

inline std::string path_digest(const std::vector<CycloneCenter>& centers) {
  std::string text;
  for (const auto& c : centers)
    text += format_iso8601(c.timestamp) + " " + std::to_string(c.i) + " " + std::to_string(c.j) + " " +
            format_shortest(c.lat) + " " + format_shortest(c.lon) + " " + format_shortest(c.pressure) + "\n";
  return content_digest(text);
}

/// Chronological greedy association. At every step all (active path, new
/// center) pairs within the gate v_max * dt are ranked by distance, then the
/// center's pressure, latitude and longitude, then path age; pairs are taken
/// in rank order when both sides are still free. Paths not extended end
/// there; unclaimed centers open new paths. Output is in creation order.
inline std::vector<CyclonePath> track(std::span<const CenterSet> sets, double vmax_kmh = kDefaultMaxSpeedKmh) {
  for (std::size_t s = 1; s < sets.size(); ++s)
    if (!(sets[s - 1].time < sets[s].time))
      throw Error(Errc::NonmonotonicTimestamps,
                  format_iso8601(sets[s].time) + " does not follow " + format_iso8601(sets[s - 1].time));

  std::vector<CyclonePath> paths;
  std::vector<std::size_t> active;  // path indices extended at the previous step
  TimePoint prev_time{};
  for (const auto& set : sets) {
    std::vector<CycloneCenter> centers = set.centers;
    std::sort(centers.begin(), centers.end(),
              [](const CycloneCenter& a, const CycloneCenter& b) { return std::tie(a.lat, a.lon) < std::tie(b.lat, b.lon); });

    std::vector<bool> claimed(centers.size(), false);
    std::vector<std::size_t> next_active;
    if (!active.empty()) {
      const double gate = vmax_kmh * hours_between(prev_time, set.time);
      struct Cand {
        double dist;
        std::size_t path;
        std::size_t center;
      };
      std::vector<Cand> cands;
      for (std::size_t a = 0; a < active.size(); ++a) {
        const auto& last = paths[active[a]].centers.back();
        for (std::size_t c = 0; c < centers.size(); ++c) {
          const double d = haversine({last.lat, last.lon}, {centers[c].lat, centers[c].lon});
          if (d <= gate) cands.push_back(Cand{d, active[a], c});
        }
      }
      std::sort(cands.begin(), cands.end(), [&](const Cand& x, const Cand& y) {
        const auto& cx = centers[x.center];
        const auto& cy = centers[y.center];
        return std::tie(x.dist, cx.pressure, cx.lat, cx.lon, x.path) <
               std::tie(y.dist, cy.pressure, cy.lat, cy.lon, y.path);
      });
      std::vector<bool> extended(paths.size(), false);
      for (const auto& c : cands) {
        if (extended[c.path] || claimed[c.center]) continue;
        extended[c.path] = true;
        claimed[c.center] = true;
        paths[c.path].centers.push_back(centers[c.center]);
        next_active.push_back(c.path);
      }
    }
    for (std::size_t c = 0; c < centers.size(); ++c) {
      if (claimed[c]) continue;
      next_active.push_back(paths.size());
      paths.push_back(CyclonePath{{}, {centers[c]}});
    }
    std::sort(next_active.begin(), next_active.end());
    active = std::move(next_active);
    prev_time = set.time;
  }
  for (auto& p : paths) p.path_id = path_digest(p.centers);
  return paths;
}

}  // namespace dslake::cyclone
