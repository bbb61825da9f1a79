#pragma once

#include <chrono>
#include <cmath>
#include <map>
#include <string>
#include <utility>

#include "dslake/core/error.hpp"
#include "dslake/core/value.hpp"
#include "dslake/cyclone/geo.hpp"
#include "dslake/cyclone/params.hpp"

namespace dslake::cyclone {

// Stub constants of the surge surrogate; they make the model deterministic
// and testable, not physically calibrated.
inline constexpr double kInverseBarometer = 1.0;  // cm per hPa
inline constexpr double kSurgeSigmaHours = 12.0;
inline constexpr double kWorstBearing = 45.0;
inline constexpr int kDefaultHorizonHours = 96;

using GaugeIndex = std::pair<std::int64_t, std::int64_t>;

inline const std::map<GaugeIndex, std::string>& gauge_registry() {
  static const std::map<GaugeIndex, std::string> gauges = {{{440, 414}, "saint-petersburg"}};
  return gauges;
}

inline constexpr GaugeIndex kDefaultGauge{440, 414};

inline const std::string& gauge_name(GaugeIndex g) {
  const auto it = gauge_registry().find(g);
  if (it == gauge_registry().end())
    throw Error(Errc::UnknownGauge, "(" + std::to_string(g.first) + ", " + std::to_string(g.second) + ")");
  return it->second;
}

/// Approach-direction weight max(0, cos(bearing - 45°)); zero without a bearing.
inline double approach_weight(const std::optional<double>& bearing) {
  if (!bearing) return 0.0;
  const double off = std::abs(std::remainder(*bearing - kWorstBearing, 360.0));
  // cos(90 deg) is not exactly zero in floating point
  if (off >= 90.0) return 0.0;
  return std::cos(deg2rad(off));
}

inline double surge_level(const CycloneParams& p, TimePoint t) {
  const double x = hours_between(p.end_time, t) / kSurgeSigmaHours;
  return kInverseBarometer * p.depth * std::exp(-(x * x)) * approach_weight(p.average_bearing);
}

/// Hourly water level at the gauge from `start` to `start + horizon` inclusive.
inline TimeSeries bsm_surrogate(const CycloneParams& p, TimePoint start, int horizon_hours,
                                GaugeIndex gauge = kDefaultGauge) {
  if (horizon_hours < 1) throw Error(Errc::BindingError, "horizon must be at least one hour");
  gauge_name(gauge);
  TimeSeries ts;
  ts.points.reserve(static_cast<std::size_t>(horizon_hours) + 1);
  for (int h = 0; h <= horizon_hours; ++h) {
    const TimePoint t = start + std::chrono::hours{h};
    ts.points.push_back(SeriesPoint{t, surge_level(p, t)});
  }
  return ts;
}

}  // namespace dslake::cyclone
