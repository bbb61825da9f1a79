#pragma once

#include <algorithm>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "dslake/core/error.hpp"
#include "dslake/cyclone/bsm.hpp"
#include "dslake/cyclone/detect.hpp"
#include "dslake/cyclone/grid.hpp"
#include "dslake/cyclone/params.hpp"
#include "dslake/cyclone/track.hpp"
#include "dslake/knowledge/kd_format.hpp"
#include "dslake/knowledge/registry.hpp"

namespace dslake::cyclone {

/// Map payload for one snapshot: the detected centers and, for each, the
/// coarse neighbourhood the reduce side needs to parametrize a path ending
/// there.
struct SnapshotCenters {
  std::vector<CycloneCenter> centers;
  std::vector<GridPatch> patches;  // parallel to centers
};

inline constexpr std::string_view kDescriptors = R"(# cyclone domain: pressure snapshots, centers, paths, surge surrogate
[library cyclone-domain]
extractor pressure-grid cyclone.extract-centers
combiner cyclone-path cyclone.track-paths
filter cyclone-path direction cyclone.filter-direction
keyword directon direction

[object grid-snapshot]
level atomic
source pressure-grid

[object cyclone-center]
level file
source pressure-grid
param Pressure hpa
param Time datetime

[object cyclone-path]
level high
alias cyclon-path
fragment cyclone-center
source pressure-grid
param Params cyclone-params composite
param StartTime datetime
param EndTime datetime
param CentralPressure hpa
param AmbientPressure hpa
param Depth hpa
param Radius km
param MeanSpeed kmh
param AverageBearing degrees
param Direction sector
param Length int

[package BSM]
input startTime datetime required
input cyclone cyclone-params required
input horizon int optional 96
output level timeseries-cm indexable
mode builtin
placement aggregator
procedure cyclone.bsm-surrogate
)";

/// The extractor: parse, then detect inside the query area. Snapshots outside
/// the query's time header yield nothing.
inline std::vector<FileLevelItem> extract_centers(std::string_view bytes, const ProcedureContext& ctx) {
  const GridSnapshot g = parse_grid_snapshot(bytes);
  if (ctx.time && !ctx.time->contains(g.timestamp)) return {};
  SnapshotCenters sc;
  sc.centers = detect_centers(g, ctx.number("detection_threshold", kDefaultThreshold), ctx.area);
  const int half = window_patch_half(g.dlat, g.dlon);
  for (const auto& c : sc.centers) sc.patches.push_back(extract_patch(g, c.i, c.j, half));
  std::vector<FileLevelItem> out;
  out.push_back(FileLevelItem{g.timestamp, std::move(sc)});
  return out;
}

/// The combiner: orders every snapshot's centers in time, tracks, and
/// parametrizes each path from the window around its final center.
inline std::vector<DomainObject> track_paths(std::span<const Fragment> fragments, const ProcedureContext& ctx) {
  struct Source {
    TimePoint time;
    const SnapshotCenters* data;
    std::size_t fragment;
  };
  std::vector<Source> sources;
  for (std::size_t f = 0; f < fragments.size(); ++f)
    for (const auto& item : fragments[f].payload) {
      const auto* sc = std::any_cast<SnapshotCenters>(&item.data);
      if (!sc) throw Error(Errc::CombinerFailure, "fragment of '" + fragments[f].file_id + "' holds no center set");
      sources.push_back(Source{item.timestamp, sc, f});
    }
  std::stable_sort(sources.begin(), sources.end(), [](const Source& a, const Source& b) { return a.time < b.time; });

  std::vector<CenterSet> sets;
  sets.reserve(sources.size());
  for (const auto& s : sources) sets.push_back(CenterSet{s.time, s.data->centers});
  const auto paths = track(sets, ctx.number("max_speed_kmh", kDefaultMaxSpeedKmh));
  const int k = static_cast<int>(ctx.number("densify", kDefaultDensify));

  std::map<TimePoint, const Source*> by_time;
  for (const auto& s : sources) by_time.emplace(s.time, &s);

  std::vector<DomainObject> out;
  for (const auto& path : paths) {
    const auto& end = path.centers.back();
    const Source& src = *by_time.at(end.timestamp);
    const auto& cs = src.data->centers;
    const auto it = std::find(cs.begin(), cs.end(), end);
    const auto& patch = src.data->patches.at(static_cast<std::size_t>(it - cs.begin()));
    const auto params = parametrize(path, patch, k);

    DomainObject obj;
    obj.object_id = path.path_id;
    obj.object_type = "cyclone-path";
    obj.params = object_params(params);
    std::vector<std::size_t> files;
    for (const auto& c : path.centers) files.push_back(by_time.at(c.timestamp)->fragment);
    std::sort(files.begin(), files.end());
    files.erase(std::unique(files.begin(), files.end()), files.end());
    for (const auto f : files) obj.provenance.push_back(fragments[f].file_id);
    obj.home_node = fragments[src.fragment].node;
    out.push_back(std::move(obj));
  }
  return out;
}

/// `direction <sector>`: paths without a bearing never match.
inline bool filter_direction(const DomainObject& obj, std::string_view value) {
  const auto b = obj.params.find("AverageBearing");
  const auto d = obj.params.find("Direction");
  if (b == obj.params.end() || d == obj.params.end()) return false;
  if (std::holds_alternative<None>(b->second.value)) return false;
  const auto* s = std::get_if<std::string>(&d->second.value);
  return s && *s == value;
}

/// BSM surrogate as a builtin: one level series per requested gauge index.
inline std::map<std::string, Value> bsm_builtin(const std::map<std::string, TypedValue>& inputs,
                                                std::span<const OutputRequest> requests) {
  auto get = [&](const char* name) -> const Value& {
    const auto it = inputs.find(name);
    if (it == inputs.end()) throw Error(Errc::BindingError, std::string("input ") + name + " is not bound");
    return it->second.value;
  };
  const auto* start = std::get_if<TimePoint>(&get("startTime"));
  const auto* rec = std::get_if<Record>(&get("cyclone"));
  if (!start || !rec) throw Error(Errc::BindingError, "BSM expects a datetime startTime and a cyclone record");
  int horizon = kDefaultHorizonHours;
  if (inputs.count("horizon")) {
    const auto* h = std::get_if<std::int64_t>(&get("horizon"));
    if (!h || *h < 1 || *h > 24 * 366) throw Error(Errc::BindingError, "horizon must be a positive hour count");
    horizon = static_cast<int>(*h);
  }
  const CycloneParams p = from_record(*rec);

  std::map<std::string, Value> out;
  if (requests.empty()) {
    out["level"] = bsm_surrogate(p, *start, horizon);
    return out;
  }
  for (const auto& r : requests) {
    if (r.name != "level") throw Error(Errc::UnknownOutputParameter, "'" + r.name + "' of BSM");
    GaugeIndex gauge = kDefaultGauge;
    if (r.indices.size() == 2) gauge = {r.indices[0], r.indices[1]};
    else if (!r.indices.empty()) throw Error(Errc::UnknownGauge, "gauges take two indices, got " + r.key);
    out[r.key] = bsm_surrogate(p, *start, horizon, gauge);
  }
  return out;
}

inline void install_procedures(ProcedureTable& t) {
  t.add_extractor("cyclone.extract-centers", extract_centers);
  t.add_combiner("cyclone.track-paths", track_paths);
  t.add_filter("cyclone.filter-direction", filter_direction);
  t.add_builtin("cyclone.bsm-surrogate", bsm_builtin);
}

/// Registers the cyclone library and the BSM package.
inline void install(KnowledgeRegistry& registry) {
  install_procedures(registry.procedures());
  register_descriptors(registry, kDescriptors);
}

}  // namespace dslake::cyclone
