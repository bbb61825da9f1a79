#pragma once

#include <chrono>

#include "dslake/core/time.hpp"

namespace dslake {

/// Latitude/longitude box in degrees, inclusive on all edges.
struct GeoBox {
  double south = 0;
  double west = 0;
  double north = 0;
  double east = 0;

  bool contains(double lat, double lon) const noexcept {
    return lat >= south && lat <= north && lon >= west && lon <= east;
  }

  friend bool operator==(const GeoBox&, const GeoBox&) = default;
};

/// Whole-day range: from the start of `first` to the end of `last`.
struct TimeRange {
  TimePoint first;
  TimePoint last;

  TimePoint begin() const noexcept { return first; }
  TimePoint end() const noexcept { return last + std::chrono::days{1}; }
  bool contains(TimePoint t) const noexcept { return t >= begin() && t < end(); }
  bool overlaps(TimePoint t0, TimePoint t1) const noexcept { return t1 >= begin() && t0 < end(); }

  friend bool operator==(const TimeRange&, const TimeRange&) = default;
};

}  // namespace dslake
