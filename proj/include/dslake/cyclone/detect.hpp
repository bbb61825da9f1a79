#pragma once

#include <optional>
#include <vector>

#include "dslake/core/region.hpp"
#include "dslake/cyclone/grid.hpp"

namespace dslake::cyclone {

inline constexpr double kDefaultThreshold = 1000.0;

struct CycloneCenter {
  double lat = 0;
  double lon = 0;
  double pressure = 0;
  TimePoint timestamp;
  int i = 0;  // grid index
  int j = 0;

  friend bool operator==(const CycloneCenter&, const CycloneCenter&) = default;
};

/// Interior cells below `threshold` that are strictly lower than all eight
/// neighbours, optionally restricted to `area`. Sorted by (lat, lon).
inline std::vector<CycloneCenter> detect_centers(const GridSnapshot& g, double threshold = kDefaultThreshold,
                                                 const std::optional<GeoBox>& area = std::nullopt) {
  std::vector<CycloneCenter> out;
  const int n = g.nlon;
  const double* v = g.values.data();
  for (int i = 1; i + 1 < g.nlat; ++i) {
    const double* row = v + static_cast<std::size_t>(i) * n;
    for (int j = 1; j + 1 < n; ++j) {
      const double c = row[j];
      if (!(c < threshold)) continue;
      const double* up = row + n;
      const double* dn = row - n;
      if (!(c < row[j - 1] && c < row[j + 1] && c < up[j - 1] && c < up[j] && c < up[j + 1] && c < dn[j - 1] &&
            c < dn[j] && c < dn[j + 1]))
        continue;
      const double lat = g.lat(i), lon = g.lon(j);
      if (area && !area->contains(lat, lon)) continue;
      out.push_back(CycloneCenter{lat, lon, c, g.timestamp, i, j});
    }
  }
  return out;
}

}  // namespace dslake::cyclone
