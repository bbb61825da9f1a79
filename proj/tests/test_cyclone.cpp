#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "support.hpp"

using namespace dslake;
using namespace dslake::cyclone;

namespace {

GridSnapshot uniform_grid(double lat0, double lon0, double d, int nlat, int nlon, double value = 1013.25,
                          TimePoint t = make_time(2011, 1, 1)) {
  GridSnapshot g;
  g.lat0 = lat0;
  g.lon0 = lon0;
  g.dlat = g.dlon = d;
  g.nlat = nlat;
  g.nlon = nlon;
  g.timestamp = t;
  g.values.assign(static_cast<std::size_t>(nlat) * nlon, value);
  return g;
}

// Gaussian depression on the sphere, written independently of the generator.
void plant(GridSnapshot& g, LatLon c, double depth, double sigma_km) {
  for (int i = 0; i < g.nlat; ++i)
    for (int j = 0; j < g.nlon; ++j) {
      const double p1 = g.lat(i) * M_PI / 180, p2 = c.lat * M_PI / 180;
      const double dl = (g.lon(j) - c.lon) * M_PI / 180;
      const double cosang = std::sin(p1) * std::sin(p2) + std::cos(p1) * std::cos(p2) * std::cos(dl);
      const double d = 6371.0 * std::acos(std::clamp(cosang, -1.0, 1.0));
      g.at(i, j) -= depth * std::exp(-d * d / (2 * sigma_km * sigma_km));
    }
}

std::vector<std::pair<int, int>> brute_force_minima(const GridSnapshot& g, double threshold) {
  std::vector<std::pair<int, int>> out;
  for (int i = 0; i < g.nlat; ++i)
    for (int j = 0; j < g.nlon; ++j) {
      if (i == 0 || j == 0 || i == g.nlat - 1 || j == g.nlon - 1) continue;
      const double v = g.at(i, j);
      if (!(v < threshold)) continue;
      bool minimum = true;
      for (int di = -1; di <= 1; ++di)
        for (int dj = -1; dj <= 1; ++dj)
          if ((di || dj) && !(v < g.at(i + di, j + dj))) minimum = false;
      if (minimum) out.emplace_back(i, j);
    }
  std::sort(out.begin(), out.end(), [&](auto a, auto b) {
    return std::make_pair(g.lat(a.first), g.lon(a.second)) < std::make_pair(g.lat(b.first), g.lon(b.second));
  });
  return out;
}

CycloneCenter center_at(double lat, double lon, TimePoint t, double p = 980, int i = 1, int j = 1) {
  return CycloneCenter{lat, lon, p, t, i, j};
}

template <typename Fn>
Errc error_code(Fn&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error raised";
  return Errc::IoError;
}

CycloneParams sample_params(double depth, double bearing) {
  CycloneParams p;
  p.start_time = make_time(2011, 1, 1);
  p.end_time = make_time(2011, 1, 3);
  p.ambient_pressure = 1010;
  p.depth = depth;
  p.central_pressure = 1010 - depth;
  p.radius_km = 400;
  p.mean_speed_kmh = 30;
  p.average_bearing = bearing;
  p.direction = classify_direction(bearing);
  p.length = 9;
  return p;
}

}  // namespace

TEST(Geo, HaversineKnownDistance) {
  EXPECT_EQ(haversine({59.95, 30.30}, {59.95, 30.30}), 0.0);
  EXPECT_NEAR(haversine({59.95, 30.30}, {59.44, 24.75}), 316.4, 0.5);
}

TEST(Geo, HaversineSymmetricAndMatchesLawOfCosines) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> lat(-89, 89), lon(-180, 180);
  for (int k = 0; k < 1000; ++k) {
    const LatLon a{lat(rng), lon(rng)}, b{lat(rng), lon(rng)};
    EXPECT_EQ(haversine(a, b), haversine(b, a));
    const long double p1 = a.lat * M_PI / 180, p2 = b.lat * M_PI / 180, dl = (b.lon - a.lon) * M_PI / 180;
    const long double ref =
        6371.0L * std::acos(std::sin(p1) * std::sin(p2) + std::cos(p1) * std::cos(p2) * std::cos(dl));
    EXPECT_NEAR(haversine(a, b), static_cast<double>(ref), 1e-3);
  }
}

TEST(Geo, InitialBearing) {
  EXPECT_NEAR(initial_bearing({50, 10}, {55, 10}), 0.0, 1e-9);
  EXPECT_NEAR(initial_bearing({55, 20}, {60, 25}), 26.2, 0.1);
  EXPECT_EQ(error_code([] { initial_bearing({55, 20}, {55, 20}); }), Errc::DegenerateBearing);
}

TEST(Geo, BearingAgreesWithDestination) {
  // Travelling along the initial bearing for the haversine distance lands on b.
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> lat(-80, 80), lon(-170, 170), step(-20, 20);
  for (int k = 0; k < 1000; ++k) {
    const LatLon a{lat(rng), lon(rng)};
    const LatLon b{std::clamp(a.lat + step(rng), -85.0, 85.0), a.lon + step(rng)};
    if (haversine(a, b) < 1) continue;
    const auto reached = destination(a, initial_bearing(a, b), haversine(a, b));
    EXPECT_LT(haversine(reached, b), 1e-6);
    // Back-bearing: leaving b towards a ends at a as well.
    const auto back = destination(b, initial_bearing(b, a), haversine(a, b));
    EXPECT_LT(haversine(back, a), 1e-6);
  }
}

TEST(Geo, SectorBoundaries) {
  EXPECT_EQ(classify_direction(45.0), Sector::NorthEast);
  EXPECT_EQ(classify_direction(22.5), Sector::NorthEast);
  EXPECT_EQ(classify_direction(26.2), Sector::NorthEast);
  EXPECT_EQ(classify_direction(22.4999), Sector::North);
  EXPECT_EQ(classify_direction(67.5), Sector::East);
  EXPECT_EQ(classify_direction(0.0), Sector::North);
  EXPECT_EQ(classify_direction(337.5), Sector::North);
  EXPECT_EQ(classify_direction(337.4999), Sector::NorthWest);
  EXPECT_EQ(classify_direction(292.5), Sector::NorthWest);
  EXPECT_EQ(classify_direction(359.9999), Sector::North);
  const double lower[8] = {337.5, 22.5, 67.5, 112.5, 157.5, 202.5, 247.5, 292.5};
  for (int s = 0; s < 8; ++s) EXPECT_EQ(classify_direction(lower[s]), static_cast<Sector>(s));
}

TEST(Geo, SectorIsPeriodic) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> b(0, 360);
  for (int k = 0; k < 1000; ++k) {
    const double x = std::round(b(rng) * 64) / 64;  // exactly representable after shifts
    for (int turns = -3; turns <= 3; ++turns) EXPECT_EQ(classify_direction(x + 360.0 * turns), classify_direction(x));
  }
}

TEST(Grid, ParseDocumentedHeader) {
  std::string text = "grid 48.0 -25.0 0.5 0.5 36 116 2011-01-01T00:00Z\n";
  for (int i = 0; i < 36; ++i) {
    for (int j = 0; j < 116; ++j) text += (j ? " " : "") + std::to_string(1000 + i) + "." + std::to_string(j % 10);
    text += "\n";
  }
  const auto g = parse_grid_snapshot(text);
  EXPECT_EQ(g.nlat, 36);
  EXPECT_EQ(g.nlon, 116);
  EXPECT_EQ(g.lat0, 48.0);
  EXPECT_EQ(g.lon0, -25.0);
  EXPECT_EQ(g.timestamp, make_time(2011, 1, 1));
  EXPECT_EQ(g.at(3, 7), 1003.7);
  EXPECT_EQ(parse_grid_snapshot(format_grid_snapshot(g)), g);
}

TEST(Grid, FormatErrors) {
  auto grid_text = [](int cols_in_row_1, const std::string& bad = "") {
    std::string t = "grid 48.0 -25.0 0.5 0.5 3 4 2011-01-01T00:00Z\n";
    for (int i = 0; i < 3; ++i) {
      const int n = i == 1 ? cols_in_row_1 : 4;
      for (int j = 0; j < n; ++j) t += (j ? " " : "") + ((i == 2 && j == 2 && !bad.empty()) ? bad : "1000");
      t += "\n";
    }
    return t;
  };
  EXPECT_NO_THROW(parse_grid_snapshot(grid_text(4)));
  try {
    parse_grid_snapshot(grid_text(3));
    FAIL();
  } catch (const FormatError& e) {
    EXPECT_EQ(e.line(), 3);
  }
  EXPECT_THROW(parse_grid_snapshot(grid_text(4, "2000.0")), FormatError);
  EXPECT_THROW(parse_grid_snapshot(grid_text(4, "nan")), FormatError);
  EXPECT_THROW(parse_grid_snapshot(grid_text(4, "10x")), FormatError);
  EXPECT_THROW(parse_grid_snapshot(grid_text(4) + "1000 1000 1000 1000\n"), FormatError);
  EXPECT_THROW(parse_grid_snapshot("grid 48 -25 0.5 0.5 1 4 2011-01-01T00:00Z\n1 2 3 4\n"), FormatError);
  EXPECT_THROW(parse_grid_snapshot("grid 89.5 0 0.5 0.5 3 2 2011-01-01T00:00Z\n"), FormatError);
  EXPECT_THROW(parse_grid_snapshot("grid 48 -25 -0.5 0.5 2 2 2011-01-01T00:00Z\n1000 1000\n1000 1000\n"), FormatError);
  EXPECT_THROW(parse_grid_snapshot("grod 48 -25 0.5 0.5 2 2 2011-01-01T00:00Z\n"), FormatError);
  EXPECT_THROW(parse_grid_snapshot(""), FormatError);
}

TEST(Detect, UniformFieldHasNoCenters) {
  EXPECT_TRUE(detect_centers(uniform_grid(48, -25, 0.5, 36, 116)).empty());
  EXPECT_TRUE(detect_centers(uniform_grid(48, -25, 0.5, 36, 116, 990)).empty());
}

TEST(Detect, PlantedDepressionAtNearestNode) {
  auto g = uniform_grid(48, -25, 0.5, 36, 116);
  plant(g, {57.0, 5.0}, 40, 300);
  const auto c = detect_centers(g);
  ASSERT_EQ(c.size(), 1u);
  EXPECT_EQ(c[0].lat, 57.0);
  EXPECT_EQ(c[0].lon, 5.0);
  EXPECT_EQ(c[0].i, 18);
  EXPECT_EQ(c[0].j, 60);

  auto off = uniform_grid(48, -25, 0.5, 36, 116);
  plant(off, {57.13, 5.2}, 40, 300);
  const auto c2 = detect_centers(off);
  ASSERT_EQ(c2.size(), 1u);
  EXPECT_EQ(c2[0].lat, 57.0);
  EXPECT_EQ(c2[0].lon, 5.0);
}

TEST(Detect, TwoDistantDepressions) {
  auto g = uniform_grid(48, -25, 0.5, 36, 116);
  const LatLon a{55, -15}, b{57, 17};
  ASSERT_GT(haversine(a, b), 1900);
  plant(g, a, 35, 250);
  plant(g, b, 45, 300);
  const auto c = detect_centers(g);
  ASSERT_EQ(c.size(), 2u);
  EXPECT_EQ(c[0].lat, 55);
  EXPECT_EQ(c[0].lon, -15);
  EXPECT_EQ(c[1].lat, 57);
  EXPECT_EQ(c[1].lon, 17);
  // Area filter keeps only the eastern one.
  const auto east = detect_centers(g, kDefaultThreshold, GeoBox{48, 0, 66, 33});
  ASSERT_EQ(east.size(), 1u);
  EXPECT_EQ(east[0].lon, 17);
}

TEST(Detect, MatchesBruteForceOnSmallRandomGrids) {
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 300; ++trial) {
    const int nlat = 2 + static_cast<int>(rng() % 20), nlon = 2 + static_cast<int>(rng() % 20);
    auto g = uniform_grid(40, 0, 1, nlat, nlon);
    for (auto& v : g.values) v = 990 + static_cast<double>(rng() % 20);  // many ties
    const double threshold = 995 + static_cast<double>(rng() % 10);
    const auto got = detect_centers(g, threshold);
    const auto want = brute_force_minima(g, threshold);
    ASSERT_EQ(got.size(), want.size());
    for (std::size_t k = 0; k < got.size(); ++k) {
      EXPECT_EQ(got[k].i, want[k].first);
      EXPECT_EQ(got[k].j, want[k].second);
      EXPECT_EQ(got[k].pressure, g.at(want[k].first, want[k].second));
    }
  }
}

TEST(Track, SingleSnapshotGivesSingletonPaths) {
  const auto t = make_time(2011, 1, 1);
  const std::vector<CenterSet> sets{{t, {center_at(50, 0, t), center_at(55, 10, t), center_at(60, 20, t)}}};
  const auto paths = track(sets);
  ASSERT_EQ(paths.size(), 3u);
  for (const auto& p : paths) EXPECT_EQ(p.centers.size(), 1u);
}

TEST(Track, SteadyMotionFormsOnePath) {
  const auto t0 = make_time(2011, 1, 1);
  std::vector<CenterSet> sets;
  LatLon pos{55, 0};
  for (int s = 0; s < 4; ++s) {
    const auto t = t0 + std::chrono::hours(6 * s);
    sets.push_back({t, {center_at(pos.lat, pos.lon, t)}});
    pos = destination(pos, 60, 200);
  }
  const auto paths = track(sets);
  ASSERT_EQ(paths.size(), 1u);
  EXPECT_EQ(paths[0].centers.size(), 4u);
  EXPECT_EQ(paths[0].path_id, path_digest(paths[0].centers));
}

TEST(Track, JumpBeyondGateSplits) {
  const auto t0 = make_time(2011, 1, 1), t1 = t0 + std::chrono::hours(6);
  const LatLon a{55, 0};
  const auto b = destination(a, 90, 900);
  const std::vector<CenterSet> sets{{t0, {center_at(a.lat, a.lon, t0)}}, {t1, {center_at(b.lat, b.lon, t1)}}};
  EXPECT_EQ(track(sets).size(), 2u);
  // A slower gate splits a 200 km step; a 12 h gap widens the gate.
  const auto c = destination(a, 90, 200);
  const std::vector<CenterSet> near{{t0, {center_at(a.lat, a.lon, t0)}}, {t1, {center_at(c.lat, c.lon, t1)}}};
  EXPECT_EQ(track(near, 30).size(), 2u);
  const auto t2 = t0 + std::chrono::hours(12);
  const auto d = destination(a, 90, 1300);
  const std::vector<CenterSet> slow{{t0, {center_at(a.lat, a.lon, t0)}}, {t2, {center_at(d.lat, d.lon, t2)}}};
  EXPECT_EQ(track(slow).size(), 1u);
}

TEST(Track, NonmonotonicTimestamps) {
  const auto t0 = make_time(2011, 1, 1);
  const std::vector<CenterSet> same{{t0, {}}, {t0, {}}};
  EXPECT_EQ(error_code([&] { track(same); }), Errc::NonmonotonicTimestamps);
  const std::vector<CenterSet> back{{t0, {}}, {t0 - std::chrono::hours(6), {}}};
  EXPECT_EQ(error_code([&] { track(back); }), Errc::NonmonotonicTimestamps);
}

TEST(Track, TieBreaksByPressureThenPosition) {
  const auto t0 = make_time(2011, 1, 1), t1 = t0 + std::chrono::hours(6);
  const LatLon a{55, 0};
  const auto n = destination(a, 0, 200), s = destination(a, 180, 200);
  // Both candidates at the same distance; the deeper one wins.
  const std::vector<CenterSet> sets{{t0, {center_at(a.lat, a.lon, t0)}},
                                    {t1, {center_at(n.lat, n.lon, t1, 990), center_at(s.lat, s.lon, t1, 985)}}};
  const auto paths = track(sets);
  ASSERT_EQ(paths.size(), 2u);
  ASSERT_EQ(paths[0].centers.size(), 2u);
  EXPECT_EQ(paths[0].centers[1].pressure, 985);
}

TEST(Track, PathsPartitionTheCenters) {
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> lat(45, 65), lon(-25, 30);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<CenterSet> sets;
    std::multiset<std::tuple<TimePoint, double, double>> all;
    auto t = make_time(2011, 3, 1);
    for (int s = 0; s < 12; ++s) {
      t += std::chrono::hours(rng() % 2 ? 6 : 12);
      CenterSet cs{t, {}};
      for (int k = static_cast<int>(rng() % 5); k > 0; --k) {
        cs.centers.push_back(center_at(lat(rng), lon(rng), t, 950 + static_cast<double>(rng() % 50)));
        all.insert({t, cs.centers.back().lat, cs.centers.back().lon});
      }
      sets.push_back(std::move(cs));
    }
    std::multiset<std::tuple<TimePoint, double, double>> seen;
    for (const auto& p : track(sets)) {
      for (std::size_t k = 0; k < p.centers.size(); ++k) {
        seen.insert({p.centers[k].timestamp, p.centers[k].lat, p.centers[k].lon});
        if (k) {
          const auto& a = p.centers[k - 1];
          const auto& b = p.centers[k];
          EXPECT_LT(a.timestamp, b.timestamp);
          EXPECT_LE(haversine({a.lat, a.lon}, {b.lat, b.lon}), 120 * hours_between(a.timestamp, b.timestamp));
        }
      }
    }
    EXPECT_EQ(seen, all);
  }
}

TEST(Densify, IdentityConstantAndLinear) {
  auto g = uniform_grid(48, -25, 0.5, 6, 9);
  EXPECT_EQ(densify(g, 1), g);
  const auto c = densify(g, 4);
  EXPECT_EQ(c.nlat, 21);
  EXPECT_EQ(c.nlon, 33);
  EXPECT_EQ(c.dlat, 0.125);
  for (double v : c.values) EXPECT_DOUBLE_EQ(v, 1013.25);

  auto f = [](double lat, double lon) { return 1000 + 0.8 * (lat - 48) - 0.3 * (lon + 25); };
  for (int i = 0; i < g.nlat; ++i)
    for (int j = 0; j < g.nlon; ++j) g.at(i, j) = f(g.lat(i), g.lon(j));
  const auto d = densify(g, 4);
  for (int I = 0; I < d.nlat; ++I)
    for (int J = 0; J < d.nlon; ++J) EXPECT_NEAR(d.at(I, J), f(d.lat(I), d.lon(J)), 1e-9);
  EXPECT_EQ(error_code([&] { densify(g, 0); }), Errc::ConfigError);
}

TEST(Densify, ValuesStayInsideTheirCoarseCell) {
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 50; ++trial) {
    auto g = uniform_grid(50, 0, 1, 2 + static_cast<int>(rng() % 8), 2 + static_cast<int>(rng() % 8));
    for (auto& v : g.values) v = 950 + static_cast<double>(rng() % 10000) / 100;
    const int k = 1 + static_cast<int>(rng() % 6);
    const auto d = densify(g, k);
    for (int I = 0; I < d.nlat; ++I)
      for (int J = 0; J < d.nlon; ++J) {
        const int i = std::min(I / k, g.nlat - 2), j = std::min(J / k, g.nlon - 2);
        const double lo = std::min({g.at(i, j), g.at(i + 1, j), g.at(i, j + 1), g.at(i + 1, j + 1)});
        const double hi = std::max({g.at(i, j), g.at(i + 1, j), g.at(i, j + 1), g.at(i + 1, j + 1)});
        EXPECT_GE(d.at(I, J), lo - 1e-9);
        EXPECT_LE(d.at(I, J), hi + 1e-9);
      }
    const auto [mn, mx] = std::minmax_element(g.values.begin(), g.values.end());
    const auto [dmn, dmx] = std::minmax_element(d.values.begin(), d.values.end());
    EXPECT_GE(*dmn, *mn - 1e-9);
    EXPECT_LE(*dmx, *mx + 1e-9);
  }
}

TEST(Parametrize, StationarySingleSnapshot) {
  auto g = uniform_grid(48, -25, 0.5, 36, 116);
  plant(g, {57, 5}, 40, 300);
  const auto c = detect_centers(g);
  ASSERT_EQ(c.size(), 1u);
  const CyclonePath path{path_digest(c), c};
  const auto p = parametrize(path, whole_grid(g));
  EXPECT_EQ(p.mean_speed_kmh, 0.0);
  EXPECT_FALSE(p.average_bearing);
  EXPECT_FALSE(p.direction);
  EXPECT_EQ(direction_text(p), "none");
  EXPECT_EQ(p.end_time, g.timestamp);
  EXPECT_EQ(p.length, 1);
  EXPECT_NEAR(p.central_pressure, 1013.25 - 40, 1e-9);
  EXPECT_EQ(p.depth, p.ambient_pressure - p.central_pressure);
}

TEST(Parametrize, RadiusOfPlantedGaussian) {
  // The 0.75-depth contour of exp(-d^2 / 2 sigma^2) lies at sigma * sqrt(2 ln 4).
  const double analytic = 300 * std::sqrt(2 * std::log(4.0));
  EXPECT_NEAR(analytic, 499.5328, 1e-4);
  auto g = uniform_grid(35, -10, 0.5, 41, 61);
  plant(g, {45, 5}, 40, 300);
  const auto c = detect_centers(g);
  ASSERT_EQ(c.size(), 1u);
  const CyclonePath path{path_digest(c), c};
  const auto p = parametrize(path, whole_grid(g));
  EXPECT_NEAR(p.radius_km, analytic, 0.10 * analytic);
  // A patch covering the window gives bit-identical parameters.
  const int half = window_patch_half(g.dlat, g.dlon);
  EXPECT_EQ(parametrize(path, extract_patch(g, c[0].i, c[0].j, half)), p);
}

TEST(Parametrize, BearingOfMovingPath) {
  const auto t0 = make_time(2011, 1, 1), t1 = t0 + std::chrono::hours(6);
  auto g = uniform_grid(50, 15, 0.5, 25, 25, 1013.25, t1);
  plant(g, {60, 25}, 30, 250);
  const auto end = detect_centers(g);
  ASSERT_EQ(end.size(), 1u);
  const CyclonePath path{"", {CycloneCenter{55, 20, 985, t0, 10, 10}, end[0]}};
  const auto p = parametrize(path, whole_grid(g));
  ASSERT_TRUE(p.average_bearing);
  EXPECT_NEAR(*p.average_bearing, 26.2, 0.1);
  EXPECT_EQ(p.direction, Sector::NorthEast);
  EXPECT_NEAR(p.mean_speed_kmh, haversine({55, 20}, {60, 25}) / 6, 1e-9);
}

TEST(Parametrize, RecordRoundTrip) {
  const auto p = sample_params(33.5, 200);
  EXPECT_EQ(from_record(to_record(p)), p);
  auto q = p;
  q.average_bearing.reset();
  q.direction.reset();
  EXPECT_EQ(from_record(to_record(q)), q);
  auto r = to_record(p);
  r.fields.erase("Depth");
  EXPECT_EQ(error_code([&] { from_record(r); }), Errc::BindingError);
  const auto params = object_params(p);
  EXPECT_EQ(params.at("EndTime").type, "datetime");
  EXPECT_EQ(std::get<TimePoint>(params.at("EndTime").value), p.end_time);
  EXPECT_EQ(params.at("Params").type, "cyclone-params");
  EXPECT_EQ(std::get<std::string>(params.at("Direction").value), "south");
}

TEST(Surrogate, ClosedForm) {
  auto p = sample_params(53, 45);
  const auto ts = bsm_surrogate(p, p.end_time - std::chrono::hours(48), 96);
  ASSERT_EQ(ts.points.size(), 97u);
  EXPECT_EQ(ts.points.front().time, p.end_time - std::chrono::hours(48));
  EXPECT_EQ(ts.points.back().time, p.end_time + std::chrono::hours(48));
  EXPECT_DOUBLE_EQ(ts.points[48].value, 53.0);
  EXPECT_NEAR(ts.points[36].value, 19.4976, 5e-5);
  EXPECT_NEAR(ts.points[60].value, 19.4976, 5e-5);
  EXPECT_NEAR(ts.points[36].value, 53 * std::exp(-1.0), 1e-12);
  EXPECT_EQ(format_fixed4(ts.points[60].value), "19.4976");
}

TEST(Surrogate, ZeroCases) {
  for (double bearing : {135.0, 270.0, 315.0}) {
    const auto p = sample_params(53, bearing);
    for (const auto& pt : bsm_surrogate(p, p.start_time, 96).points) EXPECT_EQ(pt.value, 0.0);
  }
  const auto flat = sample_params(0, 45);
  for (const auto& pt : bsm_surrogate(flat, flat.start_time, 96).points) EXPECT_EQ(pt.value, 0.0);
  auto none = sample_params(40, 45);
  none.average_bearing.reset();
  for (const auto& pt : bsm_surrogate(none, none.start_time, 96).points) EXPECT_EQ(pt.value, 0.0);
}

TEST(Surrogate, GaugeAndHorizon) {
  const auto p = sample_params(10, 45);
  EXPECT_EQ(gauge_name({440, 414}), "saint-petersburg");
  EXPECT_EQ(error_code([&] { bsm_surrogate(p, p.start_time, 10, {1, 2}); }), Errc::UnknownGauge);
  EXPECT_EQ(error_code([&] { bsm_surrogate(p, p.start_time, 0); }), Errc::BindingError);
  EXPECT_EQ(bsm_surrogate(p, p.start_time, 1).points.size(), 2u);
}

TEST(Surrogate, MonotoneInDepth) {
  std::mt19937_64 rng(9);
  for (int trial = 0; trial < 20; ++trial) {
    const double bearing = std::uniform_real_distribution<double>(0, 360)(rng);
    const int offset = static_cast<int>(rng() % 97) - 48;
    double prev = -1;
    for (int s = 0; s < 100; ++s) {
      const auto p = sample_params(s * 0.8, bearing);
      const double v = surge_level(p, p.end_time + std::chrono::hours(offset));
      EXPECT_GE(v, prev);
      prev = v;
    }
  }
}

TEST(Ensemble, MemberZeroAndDeterminism) {
  const auto base = sample_params(40, 50);
  const EnsembleSigmas sig{5, 10, 3};
  const auto one = generate_ensemble(base, 1, 7, sig);
  ASSERT_EQ(one.size(), 1u);
  EXPECT_EQ(one[0], base);
  const auto a = generate_ensemble(base, 50, 7, sig);
  EXPECT_EQ(a, generate_ensemble(base, 50, 7, sig));
  EXPECT_NE(a, generate_ensemble(base, 50, 8, sig));
  EXPECT_EQ(a[0], base);
  for (const auto& m : a) {
    EXPECT_GE(m.depth, 0);
    EXPECT_GE(*m.average_bearing, 0);
    EXPECT_LT(*m.average_bearing, 360);
    EXPECT_EQ(m.direction, classify_direction(*m.average_bearing));
    EXPECT_DOUBLE_EQ(m.central_pressure, m.ambient_pressure - m.depth);
  }
  EXPECT_EQ(error_code([&] { generate_ensemble(base, 0, 7, sig); }), Errc::ConfigError);
}

TEST(Ensemble, DepthMeanWithinThreeSigmaBand) {
  const auto base = sample_params(40, 50);
  const auto e = generate_ensemble(base, 10000, 2011, EnsembleSigmas{5, 0, 0});
  double sum = 0;
  for (const auto& m : e) sum += m.depth;
  EXPECT_NEAR(sum / static_cast<double>(e.size()), 40.0, 0.15);
}

TEST(Ensemble, DepthClampedAtZero) {
  const auto base = sample_params(1, 50);
  for (const auto& m : generate_ensemble(base, 2000, 3, EnsembleSigmas{10, 0, 0})) EXPECT_GE(m.depth, 0.0);
}

TEST(Random, SplitMixReferenceAndUniforms) {
  // Reference outputs of SplitMix64 seeded with 0 (Vigna's published algorithm).
  SplitMix64 r(0);
  EXPECT_EQ(r.next(), 0xe220a8397b1dcdafull);
  EXPECT_EQ(r.next(), 0x6e789e6aa1b965f4ull);
  EXPECT_EQ(r.next(), 0x06c45d188009454full);
  SplitMix64 u(1);
  for (int k = 0; k < 10000; ++k) {
    const double x = u.uniform();
    EXPECT_GE(x, 0.0);
    EXPECT_LT(x, 1.0);
    EXPECT_LT(u.below(7), 7u);
  }
}

TEST(Synthetic, NoCyclonesGivesUniformSnapshots) {
  SyntheticSpec spec;
  spec.time = TimeRange{make_time(2011, 1, 1), make_time(2011, 1, 3)};
  const auto data = generate_synthetic(spec, 1);
  ASSERT_EQ(data.files.size(), 12u);
  EXPECT_TRUE(data.truth.paths.empty());
  for (const auto& f : data.files) {
    const auto g = parse_grid_snapshot(f.bytes());
    for (double v : g.values) EXPECT_EQ(v, 1013.25);
    EXPECT_EQ(g.timestamp, f.t0());
  }
}

TEST(Synthetic, FullYearFrameOverDefaultArea) {
  SyntheticSpec spec;
  const auto frame = grid_frame(spec.area, spec.spacing);
  EXPECT_EQ(frame.nlat, 38);
  EXPECT_EQ(frame.nlon, 117);
  EXPECT_EQ(snapshot_times(spec).size(), 1460u);
  EXPECT_LE(frame.lat0, spec.area.south);
  EXPECT_GE(frame.lat0 + (frame.nlat - 1) * spec.spacing, spec.area.north);
  EXPECT_GE(frame.lon0 + (frame.nlon - 1) * spec.spacing, spec.area.east);
}

TEST(Synthetic, FieldMatchesIndependentGaussian) {
  SyntheticSpec spec;
  spec.time = TimeRange{make_time(2011, 3, 1), make_time(2011, 3, 2)};
  const PlantedCyclone c{make_time(2011, 3, 1, 6), make_time(2011, 3, 2, 6), {55, 0}, 45, 30, 40, 300};
  spec.cyclones = {c};
  const auto data = generate_synthetic(spec, 1);
  for (const auto& f : data.files) {
    const auto g = parse_grid_snapshot(f.bytes());
    auto want = uniform_grid(g.lat0, g.lon0, g.dlat, g.nlat, g.nlon, 1013.25, g.timestamp);
    if (c.active(g.timestamp)) plant(want, c.position(g.timestamp), c.depth, c.sigma_km);
    for (std::size_t k = 0; k < g.values.size(); ++k) EXPECT_NEAR(g.values[k], want.values[k], 1e-9);
  }
}

TEST(Synthetic, OneNorthEastCycloneIsRecovered) {
  SyntheticSpec spec;
  spec.time = TimeRange{make_time(2011, 3, 1), make_time(2011, 3, 5)};
  spec.cyclones = {PlantedCyclone{make_time(2011, 3, 1, 12), make_time(2011, 3, 3, 12), {54, -10}, 45, 30, 40, 300}};
  const auto data = generate_synthetic(spec, 1);
  ASSERT_EQ(data.truth.paths.size(), 1u);
  EXPECT_EQ(data.truth.paths[0].sector, Sector::NorthEast);
  std::vector<CenterSet> sets;
  std::map<TimePoint, GridSnapshot> grids;
  for (const auto& f : data.files) {
    auto g = parse_grid_snapshot(f.bytes());
    sets.push_back({g.timestamp, detect_centers(g)});
    grids.emplace(g.timestamp, std::move(g));
  }
  const auto paths = track(sets);
  ASSERT_EQ(paths.size(), 1u);
  EXPECT_EQ(paths[0].centers.size(), data.truth.paths[0].centers.size());
  for (std::size_t k = 0; k < paths[0].centers.size(); ++k) {
    const auto& [t, ll] = data.truth.paths[0].centers[k];
    EXPECT_EQ(paths[0].centers[k].timestamp, t);
    EXPECT_LT(haversine({paths[0].centers[k].lat, paths[0].centers[k].lon}, ll), 40);
  }
  const auto p = parametrize(paths[0], whole_grid(grids.at(paths[0].centers.back().timestamp)));
  EXPECT_EQ(p.direction, Sector::NorthEast);
}

TEST(Synthetic, OverlappingCyclonesAreRejected) {
  SyntheticSpec spec;
  spec.time = TimeRange{make_time(2011, 3, 1), make_time(2011, 3, 5)};
  spec.cyclones = {PlantedCyclone{make_time(2011, 3, 1), make_time(2011, 3, 3), {55, 0}, 45, 30, 40, 300},
                   PlantedCyclone{make_time(2011, 3, 2), make_time(2011, 3, 4), {57, 3}, 90, 30, 40, 250}};
  EXPECT_EQ(error_code([&] { generate_synthetic(spec, 1); }), Errc::SpecError);
  // Disjoint lifetimes do not overlap.
  spec.cyclones[1].t_start = make_time(2011, 3, 4);
  spec.cyclones[1].t_end = make_time(2011, 3, 5);
  EXPECT_NO_THROW(generate_synthetic(spec, 1));
}

TEST(Synthetic, RandomCyclonesHonourListedSectors) {
  SyntheticSpec spec;
  spec.random_count = 5;
  spec.random_sectors = {Sector::NorthEast, Sector::NorthEast};
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto data = generate_synthetic(spec, seed);
    ASSERT_EQ(data.truth.paths.size(), 5u);
    EXPECT_EQ(data.truth.count(Sector::NorthEast), 2u);
    EXPECT_EQ(data.truth.canonical(), generate_synthetic(spec, seed).truth.canonical());
  }
}

TEST(Synthetic, SpecParsing) {
  const auto spec = parse_synthetic_spec(testing_support::sample("synthetic.spec"));
  EXPECT_EQ(spec.dataset, "synthetic");
  EXPECT_EQ(spec.random_count, 5);
  EXPECT_EQ(spec.random_sectors.size(), 2u);
  EXPECT_EQ(spec.step_hours, 6);
  const auto one = parse_synthetic_spec(
      "dataset x\ntime 01.03.2011 05.03.2011\ncyclone 2011-03-01T12:00Z 2011-03-03T12:00Z 54 -10 45 30 40 300\n");
  ASSERT_EQ(one.cyclones.size(), 1u);
  EXPECT_EQ(one.cyclones[0].start, (LatLon{54, -10}));
  EXPECT_EQ(error_code([] { parse_synthetic_spec("colour red\n"); }), Errc::SpecError);
  EXPECT_EQ(error_code([] { parse_synthetic_spec("random 3 sideways\n"); }), Errc::SpecError);
  EXPECT_EQ(error_code([] { parse_synthetic_spec("step 0\n"); }), Errc::SpecError);
}

TEST(Plugin, StitchingAcrossArbitraryFileGroups) {
  SyntheticSpec spec;
  spec.time = TimeRange{make_time(2011, 3, 1), make_time(2011, 3, 8)};
  spec.random_count = 3;
  const auto data = generate_synthetic(spec, 21);
  const ProcedureContext ctx{spec.area, spec.time, {}};

  std::vector<Fragment> frags;
  for (const auto& f : data.files)
    frags.push_back(Fragment{f.file_id(), "pressure-grid", 0, f.t0(), f.t1(), extract_centers(f.bytes(), ctx)});
  const auto reference = track_paths(frags, ctx);
  ASSERT_EQ(reference.size(), 3u);

  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 10; ++trial) {
    auto shuffled = frags;
    std::shuffle(shuffled.begin(), shuffled.end(), rng);
    for (auto& f : shuffled) f.node = static_cast<int>(rng() % 3);
    const auto got = track_paths(shuffled, ctx);
    ASSERT_EQ(got.size(), reference.size());
    for (std::size_t k = 0; k < got.size(); ++k) {
      EXPECT_EQ(got[k].object_id, reference[k].object_id);
      EXPECT_EQ(got[k].params, reference[k].params);
      EXPECT_EQ(got[k].provenance.size(), reference[k].provenance.size());
    }
  }
}

TEST(Plugin, DirectionFilterNeverMatchesUndirectedPaths) {
  DomainObject obj;
  obj.params = object_params(sample_params(30, 40));
  EXPECT_TRUE(filter_direction(obj, "north-east"));
  EXPECT_FALSE(filter_direction(obj, "north-west"));
  auto p = sample_params(30, 40);
  p.average_bearing.reset();
  p.direction.reset();
  obj.params = object_params(p);
  for (auto name : kSectorNames) EXPECT_FALSE(filter_direction(obj, name));
  EXPECT_FALSE(filter_direction(obj, "none"));
}
