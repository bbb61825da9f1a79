#pragma once

#include <algorithm>
#include <cstdint>
#include <vector>

#include "dslake/core/error.hpp"
#include "dslake/core/random.hpp"
#include "dslake/cyclone/params.hpp"

namespace dslake::cyclone {

struct EnsembleSigmas {
  double depth = 0;    // hPa
  double bearing = 0;  // degrees
  double speed = 0;    // km/h
};

/// Member 0 is `base`; every other member draws three normals in the order
/// depth, bearing, speed. Depth and speed are clamped at zero, the bearing is
/// wrapped, ambient pressure is kept and the central pressure follows the
/// depth. A path without a bearing keeps none (the draw is still consumed).
inline std::vector<CycloneParams> generate_ensemble(const CycloneParams& base, int n, std::uint64_t seed,
                                                    const EnsembleSigmas& sigmas) {
  if (n < 1) throw Error(Errc::ConfigError, "ensemble size must be at least 1");
  std::vector<CycloneParams> out;
  out.reserve(static_cast<std::size_t>(n));
  out.push_back(base);
  SplitMix64 rng(seed);
  for (int m = 1; m < n; ++m) {
    CycloneParams p = base;
    const double zd = rng.normal(), zb = rng.normal(), zs = rng.normal();
    p.depth = std::max(0.0, base.depth + sigmas.depth * zd);
    p.central_pressure = p.ambient_pressure - p.depth;
    if (base.average_bearing) {
      p.average_bearing = wrap_degrees(*base.average_bearing + sigmas.bearing * zb);
      p.direction = classify_direction(*p.average_bearing);
    }
    p.mean_speed_kmh = std::max(0.0, base.mean_speed_kmh + sigmas.speed * zs);
    out.push_back(p);
  }
  return out;
}

}  // namespace dslake::cyclone
