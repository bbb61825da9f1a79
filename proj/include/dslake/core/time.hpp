#pragma once

#include <chrono>
#include <cstdint>
#include <cstdio>
#include <optional>
#include <string>
#include <string_view>

namespace dslake {

/// UTC instant with one-second resolution. All timestamps in the system use it.
using TimePoint = std::chrono::sys_seconds;
using Hours = std::chrono::hours;

inline TimePoint make_time(int year, unsigned month, unsigned day, int hour = 0, int minute = 0,
                           int second = 0) {
  using namespace std::chrono;
  const sys_days d = year_month_day{std::chrono::year{year}, std::chrono::month{month},
                                    std::chrono::day{day}};
  return TimePoint{d} + hours{hour} + minutes{minute} + seconds{second};
}

namespace detail {

inline bool read_fixed_digits(std::string_view s, std::size_t pos, std::size_t count, int& out) {
  if (pos + count > s.size()) return false;
  int v = 0;
  for (std::size_t i = 0; i < count; ++i) {
    const char c = s[pos + i];
    if (c < '0' || c > '9') return false;
    v = v * 10 + (c - '0');
  }
  out = v;
  return true;
}

inline std::optional<TimePoint> checked_time(int y, int mo, int d, int h, int mi, int s) {
  using namespace std::chrono;
  if (mo < 1 || mo > 12 || d < 1 || d > 31) return std::nullopt;
  const year_month_day ymd{year{y}, month{static_cast<unsigned>(mo)}, day{static_cast<unsigned>(d)}};
  if (!ymd.ok() || h > 23 || mi > 59 || s > 59) return std::nullopt;
  return TimePoint{sys_days{ymd}} + hours{h} + minutes{mi} + seconds{s};
}

}  // namespace detail

/// Accepts `YYYY-MM-DDTHH:MMZ` and `YYYY-MM-DDTHH:MM:SSZ`.
inline std::optional<TimePoint> parse_iso8601(std::string_view s) {
  int y, mo, d, h, mi, sec = 0;
  if (!detail::read_fixed_digits(s, 0, 4, y) || s.size() < 17 || s[4] != '-' ||
      !detail::read_fixed_digits(s, 5, 2, mo) || s[7] != '-' ||
      !detail::read_fixed_digits(s, 8, 2, d) || s[10] != 'T' ||
      !detail::read_fixed_digits(s, 11, 2, h) || s[13] != ':' ||
      !detail::read_fixed_digits(s, 14, 2, mi))
    return std::nullopt;
  std::size_t pos = 16;
  if (s[pos] == ':') {
    if (!detail::read_fixed_digits(s, pos + 1, 2, sec)) return std::nullopt;
    pos += 3;
  }
  if (pos + 1 != s.size() || s[pos] != 'Z') return std::nullopt;
  return detail::checked_time(y, mo, d, h, mi, sec);
}

/// Renders `YYYY-MM-DDTHH:MM:SSZ`.
inline std::string format_iso8601(TimePoint t) {
  using namespace std::chrono;
  const auto day_start = floor<days>(t);
  const year_month_day ymd{day_start};
  const hh_mm_ss<seconds> tod{t - day_start};
  char buf[32];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02d:%02d:%02dZ", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()),
                static_cast<int>(tod.hours().count()), static_cast<int>(tod.minutes().count()),
                static_cast<int>(tod.seconds().count()));
  return buf;
}

/// Accepts the script date form `dd.mm.yyyy` (one- or two-digit day and month).
inline std::optional<TimePoint> parse_dmy(std::string_view s) {
  const auto dot1 = s.find('.');
  if (dot1 == std::string_view::npos) return std::nullopt;
  const auto dot2 = s.find('.', dot1 + 1);
  if (dot2 == std::string_view::npos) return std::nullopt;
  const auto dlen = dot1, mlen = dot2 - dot1 - 1, ylen = s.size() - dot2 - 1;
  if (dlen < 1 || dlen > 2 || mlen < 1 || mlen > 2 || ylen != 4) return std::nullopt;
  int d, m, y;
  if (!detail::read_fixed_digits(s, 0, dlen, d) || !detail::read_fixed_digits(s, dot1 + 1, mlen, m) ||
      !detail::read_fixed_digits(s, dot2 + 1, 4, y))
    return std::nullopt;
  return detail::checked_time(y, m, d, 0, 0, 0);
}

inline std::string format_dmy(TimePoint t) {
  using namespace std::chrono;
  const year_month_day ymd{floor<days>(t)};
  char buf[16];
  std::snprintf(buf, sizeof buf, "%02u.%02u.%04d", static_cast<unsigned>(ymd.day()),
                static_cast<unsigned>(ymd.month()), static_cast<int>(ymd.year()));
  return buf;
}

inline double hours_between(TimePoint from, TimePoint to) {
  return std::chrono::duration<double, std::ratio<3600>>(to - from).count();
}

}  // namespace dslake
