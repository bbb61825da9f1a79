#pragma once

#include <any>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "dslake/core/error.hpp"
#include "dslake/core/region.hpp"
#include "dslake/core/text.hpp"
#include "dslake/core/value.hpp"

namespace dslake {

using ParamMap = std::map<std::string, std::string>;

/// One file-level structure produced by an extractor, e.g. the cyclone
/// centers found in a single snapshot. `data` is owned by the plugin.
struct FileLevelItem {
  TimePoint timestamp;
  std::any data;
};

/// Map output for one file.
struct Fragment {
  std::string file_id;
  std::string source_kind;  // file kind the extractor read the file as
  int node = -1;
  TimePoint t0;
  TimePoint t1;
  std::vector<FileLevelItem> payload;
};

/// A high-level structure assembled at the aggregation stage.
struct DomainObject {
  std::string object_id;
  std::string object_type;
  std::map<std::string, TypedValue> params;
  std::vector<std::string> provenance;  // contributing file ids, canonical order
  int home_node = -1;                    // node holding the most recent contributing file
};

/// Query headers and task parameters handed to every procedure.
struct ProcedureContext {
  std::optional<GeoBox> area;
  std::optional<TimeRange> time;
  ParamMap extra;

  double number(const std::string& key, double fallback) const {
    const auto it = extra.find(key);
    if (it == extra.end()) return fallback;
    const auto v = parse_double(it->second);
    if (!v) throw Error(Errc::ConfigError, "parameter '" + key + "' is not a number: " + it->second);
    return *v;
  }
};

/// One requested output of a package call, e.g. `level[440,414]`.
struct OutputRequest {
  std::string name;
  std::vector<std::int64_t> indices;
  std::string key;

  friend bool operator==(const OutputRequest&, const OutputRequest&) = default;
};

using ExtractorFn = std::function<std::vector<FileLevelItem>(std::string_view bytes, const ProcedureContext&)>;
using CombinerFn = std::function<std::vector<DomainObject>(std::span<const Fragment>, const ProcedureContext&)>;
using FilterFn = std::function<bool(const DomainObject&, std::string_view value)>;
using BuiltinFn = std::function<std::map<std::string, Value>(const std::map<std::string, TypedValue>& inputs,
                                                              std::span<const OutputRequest> requests)>;

/// Executable procedures a plugin contributes, addressed by id from descriptors.
class ProcedureTable {
 public:
  void add_extractor(const std::string& id, ExtractorFn fn) { add(extractors_, id, std::move(fn)); }
  void add_combiner(const std::string& id, CombinerFn fn) { add(combiners_, id, std::move(fn)); }
  void add_filter(const std::string& id, FilterFn fn) { add(filters_, id, std::move(fn)); }
  void add_builtin(const std::string& id, BuiltinFn fn) { add(builtins_, id, std::move(fn)); }

  const ExtractorFn& extractor(const std::string& id) const { return get(extractors_, id); }
  const CombinerFn& combiner(const std::string& id) const { return get(combiners_, id); }
  const FilterFn& filter(const std::string& id) const { return get(filters_, id); }
  const BuiltinFn& builtin(const std::string& id) const { return get(builtins_, id); }

  bool has_extractor(const std::string& id) const { return extractors_.count(id) != 0; }
  bool has_combiner(const std::string& id) const { return combiners_.count(id) != 0; }
  bool has_filter(const std::string& id) const { return filters_.count(id) != 0; }
  bool has_builtin(const std::string& id) const { return builtins_.count(id) != 0; }

 private:
  template <typename Fn>
  static void add(std::map<std::string, Fn>& m, const std::string& id, Fn fn) {
    if (!m.emplace(id, std::move(fn)).second) throw Error(Errc::DuplicateName, "procedure '" + id + "'");
  }

  template <typename Fn>
  static const Fn& get(const std::map<std::string, Fn>& m, const std::string& id) {
    const auto it = m.find(id);
    if (it == m.end()) throw Error(Errc::UnknownProcedure, "'" + id + "'");
    return it->second;
  }

  std::map<std::string, ExtractorFn> extractors_;
  std::map<std::string, CombinerFn> combiners_;
  std::map<std::string, FilterFn> filters_;
  std::map<std::string, BuiltinFn> builtins_;
};

}  // namespace dslake
