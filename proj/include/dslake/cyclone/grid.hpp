#pragma once

#include <algorithm>
#include <cmath>
#include <cstring>
#include <string>
#include <string_view>
#include <vector>

#include "dslake/core/error.hpp"
#include "dslake/core/text.hpp"
#include "dslake/core/time.hpp"

namespace dslake::cyclone {

inline constexpr double kMinPressure = 850.0;
inline constexpr double kMaxPressure = 1100.0;

/// Regular lat/lon pressure field; row 0 is the southernmost.
struct GridSnapshot {
  double lat0 = 0;
  double lon0 = 0;
  double dlat = 1;
  double dlon = 1;
  int nlat = 0;
  int nlon = 0;
  TimePoint timestamp;
  std::vector<double> values;  // row-major, nlat * nlon

  double at(int i, int j) const { return values[static_cast<std::size_t>(i) * nlon + j]; }
  double& at(int i, int j) { return values[static_cast<std::size_t>(i) * nlon + j]; }
  double lat(int i) const { return lat0 + i * dlat; }
  double lon(int j) const { return lon0 + j * dlon; }

  friend bool operator==(const GridSnapshot&, const GridSnapshot&) = default;
};

namespace detail {

[[noreturn]] inline void grid_fail(int line, const std::string& msg) { throw FormatError(line, msg); }

inline void check_geometry(const GridSnapshot& g, int line) {
  if (!(g.dlat > 0) || !(g.dlon > 0)) grid_fail(line, "grid spacing must be positive");
  if (g.nlat < 2 || g.nlon < 2) grid_fail(line, "grid needs at least 2 rows and 2 columns");
  const double top = g.lat0 + (g.nlat - 1) * g.dlat;
  const double right = g.lon0 + (g.nlon - 1) * g.dlon;
  if (g.lat0 < -90 || top > 90 + 1e-9 || g.lon0 < -180 || right > 180 + 1e-9)
    grid_fail(line, "grid extends outside [-90, 90] x [-180, 180]");
}

}  // namespace detail

/// Reads the text snapshot format:
///
///   grid <lat0> <lon0> <dlat> <dlon> <nlat> <nlon> <ISO-8601 time>
///   <nlon pressures>          southernmost row first, nlat lines
inline GridSnapshot parse_grid_snapshot(std::string_view bytes) {
  GridSnapshot g;
  std::size_t pos = 0;
  int lineno = 0;
  auto next_line = [&]() -> std::string_view {
    if (pos >= bytes.size()) return {};
    auto e = bytes.find('\n', pos);
    if (e == std::string_view::npos) e = bytes.size();
    std::string_view line = bytes.substr(pos, e - pos);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    pos = e + 1;
    ++lineno;
    return line;
  };

  const auto header = split_ws(next_line());
  if (header.size() != 8 || header[0] != "grid") detail::grid_fail(1, "expected 'grid lat0 lon0 dlat dlon nlat nlon time'");
  const auto lat0 = parse_double(header[1]), lon0 = parse_double(header[2]);
  const auto dlat = parse_double(header[3]), dlon = parse_double(header[4]);
  const auto nlat = parse_int(header[5]), nlon = parse_int(header[6]);
  const auto ts = parse_iso8601(header[7]);
  if (!lat0 || !lon0 || !dlat || !dlon || !nlat || !nlon || !ts) detail::grid_fail(1, "malformed grid header");
  if (*nlat > 100000 || *nlon > 100000) detail::grid_fail(1, "grid dimensions out of range");
  g.lat0 = *lat0;
  g.lon0 = *lon0;
  g.dlat = *dlat;
  g.dlon = *dlon;
  g.nlat = static_cast<int>(*nlat);
  g.nlon = static_cast<int>(*nlon);
  g.timestamp = *ts;
  detail::check_geometry(g, 1);

  g.values.resize(static_cast<std::size_t>(g.nlat) * g.nlon);
  // Snapshots are dominated by repeats of the background value, so a token
  // equal to its predecessor reuses the parsed result.
  std::string_view prev_tok;
  double prev_val = 0;
  for (int i = 0; i < g.nlat; ++i) {
    if (pos >= bytes.size()) detail::grid_fail(lineno + 1, "expected " + std::to_string(g.nlat) + " rows");
    const auto line = next_line();
    std::size_t k = 0;
    int j = 0;
    while (true) {
      while (k < line.size() && (line[k] == ' ' || line[k] == '\t')) ++k;
      if (k >= line.size()) break;
      const std::size_t b = k;
      while (k < line.size() && line[k] != ' ' && line[k] != '\t') ++k;
      const std::string_view tok = line.substr(b, k - b);
      if (j >= g.nlon) detail::grid_fail(lineno, "row has more than " + std::to_string(g.nlon) + " values");
      double v;
      if (tok.size() == prev_tok.size() && std::memcmp(tok.data(), prev_tok.data(), tok.size()) == 0) {
        v = prev_val;
      } else {
        const auto parsed = parse_double(tok);
        if (!parsed) detail::grid_fail(lineno, "bad pressure value '" + std::string(tok) + "'");
        v = *parsed;
        if (v < kMinPressure || v > kMaxPressure)
          detail::grid_fail(lineno, "pressure " + std::string(tok) + " outside [850, 1100] hPa");
        prev_tok = tok;
        prev_val = v;
      }
      g.values[static_cast<std::size_t>(i) * g.nlon + j] = v;
      ++j;
    }
    if (j != g.nlon)
      detail::grid_fail(lineno, "row has " + std::to_string(j) + " values, expected " + std::to_string(g.nlon));
  }
  while (pos < bytes.size())
    if (!trim(next_line()).empty()) detail::grid_fail(lineno, "trailing data after the last row");
  return g;
}

/// Writes the snapshot format with shortest round-trip decimals.
inline std::string format_grid_snapshot(const GridSnapshot& g) {
  std::string out = "grid " + format_shortest(g.lat0) + " " + format_shortest(g.lon0) + " " + format_shortest(g.dlat) +
                    " " + format_shortest(g.dlon) + " " + std::to_string(g.nlat) + " " + std::to_string(g.nlon) + " " +
                    format_iso8601(g.timestamp) + "\n";
  out.reserve(out.size() + g.values.size() * 8);
  double prev = std::nan("");
  std::string prev_text;
  for (int i = 0; i < g.nlat; ++i) {
    for (int j = 0; j < g.nlon; ++j) {
      const double v = g.at(i, j);
      if (!(v == prev) || std::signbit(v) != std::signbit(prev)) {
        prev = v;
        prev_text = format_shortest(v);
      }
      if (j) out += ' ';
      out += prev_text;
    }
    out += '\n';
  }
  return out;
}

/// Rectangular piece of a parent grid, addressed in the parent's indices.
/// Coordinates derive from the parent's origin so that computations on a
/// patch and on the whole grid agree bit for bit.
struct GridPatch {
  double lat0 = 0;  // parent origin and spacing
  double lon0 = 0;
  double dlat = 1;
  double dlon = 1;
  int parent_nlat = 0;
  int parent_nlon = 0;
  int i0 = 0;
  int j0 = 0;
  int ni = 0;
  int nj = 0;
  TimePoint timestamp;
  std::vector<double> values;  // ni * nj

  double at(int i, int j) const { return values[static_cast<std::size_t>(i - i0) * nj + (j - j0)]; }
  bool covers(int i, int j) const { return i >= i0 && i < i0 + ni && j >= j0 && j < j0 + nj; }

  friend bool operator==(const GridPatch&, const GridPatch&) = default;
};

/// Parent cells [ic - half, ic + half] x [jc - half, jc + half], clipped to the grid.
inline GridPatch extract_patch(const GridSnapshot& g, int ic, int jc, int half) {
  GridPatch p;
  p.lat0 = g.lat0;
  p.lon0 = g.lon0;
  p.dlat = g.dlat;
  p.dlon = g.dlon;
  p.parent_nlat = g.nlat;
  p.parent_nlon = g.nlon;
  p.timestamp = g.timestamp;
  p.i0 = std::max(0, ic - half);
  p.j0 = std::max(0, jc - half);
  const int i1 = std::min(g.nlat - 1, ic + half);
  const int j1 = std::min(g.nlon - 1, jc + half);
  p.ni = i1 - p.i0 + 1;
  p.nj = j1 - p.j0 + 1;
  p.values.reserve(static_cast<std::size_t>(p.ni) * p.nj);
  for (int i = p.i0; i <= i1; ++i)
    for (int j = p.j0; j <= j1; ++j) p.values.push_back(g.at(i, j));
  return p;
}

inline GridPatch whole_grid(const GridSnapshot& g) { return extract_patch(g, 0, 0, std::max(g.nlat, g.nlon)); }

/// Bilinear value at dense index (I, J) of the factor-k refinement. Only the
/// four surrounding parent cells are read.
inline double dense_value(const GridPatch& p, int k, int I, int J) {
  const int i = I / k, a = I % k;
  const int j = J / k, b = J % k;
  const int i1 = std::min(i + 1, p.parent_nlat - 1);
  const int j1 = std::min(j + 1, p.parent_nlon - 1);
  const double fa = static_cast<double>(a) / k;
  const double fb = static_cast<double>(b) / k;
  const double v00 = p.at(i, j);
  const double v10 = a ? p.at(i1, j) : 0.0;
  const double v01 = b ? p.at(i, j1) : 0.0;
  const double v11 = a && b ? p.at(i1, j1) : 0.0;
  return (1 - fa) * (1 - fb) * v00 + fa * (1 - fb) * v10 + (1 - fa) * fb * v01 + fa * fb * v11;
}

inline double dense_lat(const GridPatch& p, int k, int I) { return p.lat0 + I * (p.dlat / k); }
inline double dense_lon(const GridPatch& p, int k, int J) { return p.lon0 + J * (p.dlon / k); }

/// Bilinear refinement onto spacing dlat/k, dlon/k over the same box.
inline GridSnapshot densify(const GridSnapshot& g, int k) {
  if (k < 1) throw Error(Errc::ConfigError, "densify factor must be at least 1");
  if (k == 1) return g;
  const GridPatch p = whole_grid(g);
  GridSnapshot d;
  d.lat0 = g.lat0;
  d.lon0 = g.lon0;
  d.dlat = g.dlat / k;
  d.dlon = g.dlon / k;
  d.nlat = (g.nlat - 1) * k + 1;
  d.nlon = (g.nlon - 1) * k + 1;
  d.timestamp = g.timestamp;
  d.values.resize(static_cast<std::size_t>(d.nlat) * d.nlon);
  for (int I = 0; I < d.nlat; ++I)
    for (int J = 0; J < d.nlon; ++J) d.at(I, J) = dense_value(p, k, I, J);
  return d;
}

}  // namespace dslake::cyclone
