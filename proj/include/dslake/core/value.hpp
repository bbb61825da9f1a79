#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <variant>
#include <vector>

#include "dslake/core/text.hpp"
#include "dslake/core/time.hpp"

namespace dslake {

struct SeriesPoint {
  TimePoint time;
  double value = 0;

  friend bool operator==(const SeriesPoint&, const SeriesPoint&) = default;
};

struct TimeSeries {
  std::vector<SeriesPoint> points;

  friend bool operator==(const TimeSeries&, const TimeSeries&) = default;
};

/// Absent value (e.g. the bearing of a single-snapshot cyclone).
using None = std::monostate;

using Scalar = std::variant<None, std::int64_t, double, std::string, TimePoint, Hours>;

/// Named fields of a composite parameter such as a cyclone's `Params`.
struct Record {
  std::map<std::string, Scalar> fields;

  friend bool operator==(const Record&, const Record&) = default;
};

using Value = std::variant<None, std::int64_t, double, std::string, TimePoint, Hours, TimeSeries, Record>;

/// A value together with its semantic type tag. Tags are opaque and only
/// compared for equality.
struct TypedValue {
  std::string type;
  Value value;

  friend bool operator==(const TypedValue&, const TypedValue&) = default;
};

inline Value to_value(const Scalar& s) {
  return std::visit([](const auto& v) -> Value { return v; }, s);
}

inline std::string render_scalar(const Scalar& s) {
  struct V {
    std::string operator()(None) const { return "none"; }
    std::string operator()(std::int64_t v) const { return std::to_string(v); }
    std::string operator()(double v) const { return format_fixed4(v); }
    std::string operator()(const std::string& v) const { return v; }
    std::string operator()(TimePoint v) const { return format_iso8601(v); }
    std::string operator()(Hours v) const { return std::to_string(v.count()) + "h"; }
  };
  return std::visit(V{}, s);
}

/// Canonical single-line rendering. Series render as `series <n>`; use
/// render_series_lines for their points.
inline std::string render_value(const Value& v) {
  if (const auto* ts = std::get_if<TimeSeries>(&v)) return "series " + std::to_string(ts->points.size());
  if (const auto* rec = std::get_if<Record>(&v)) {
    std::string out = "{";
    bool first = true;
    for (const auto& [k, f] : rec->fields) {
      if (!first) out += ", ";
      first = false;
      out += k + "=" + render_scalar(f);
    }
    return out + "}";
  }
  return std::visit(
      [](const auto& x) -> std::string {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, TimeSeries> || std::is_same_v<T, Record>) {
          return {};
        } else {
          return render_scalar(Scalar{x});
        }
      },
      v);
}

}  // namespace dslake
