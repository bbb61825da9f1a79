#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "dslake/core/digest.hpp"
#include "dslake/core/value.hpp"

namespace dslake::engine {

struct ObjectEntry {
  std::string object_id;
  std::string object_type;
  std::map<std::string, Value> requested_params;
};

struct SimulationEntry {
  std::string object_id;
  std::string package;
  bool ok = true;
  std::string failure;                   // reason when not ok
  std::map<std::string, Value> outputs;  // keyed by out-item text
  std::vector<std::string> provenance;   // contributing file ids
  std::optional<int> executed_on;
  double wall_ms = 0;
};

struct Diagnostics {
  int files_mapped = 0;
  int fragments = 0;
  std::set<int> nodes_used;
};

/// Result of a task. The canonical text leaves out everything that depends
/// on where or how fast the work ran (nodes, placement, timings); `full()`
/// adds it.
struct ResultDocument {
  std::string task_id;
  std::vector<ObjectEntry> objects;
  std::vector<SimulationEntry> simulations;
  Diagnostics diagnostics;

  void sort() {
    std::sort(objects.begin(), objects.end(), [](const ObjectEntry& a, const ObjectEntry& b) {
      return std::tie(a.object_id, a.object_type) < std::tie(b.object_id, b.object_type);
    });
    std::sort(simulations.begin(), simulations.end(), [](const SimulationEntry& a, const SimulationEntry& b) {
      return std::tie(a.object_id, a.package) < std::tie(b.object_id, b.package);
    });
  }

  std::string canonical() const { return render(false); }
  std::string full() const { return render(true); }
  std::string digest() const { return content_digest(canonical()); }

 private:
  static void value_lines(std::string& out, const std::string& indent, const std::string& key, const Value& v) {
    out += indent + key + " = " + render_value(v) + "\n";
    if (const auto* ts = std::get_if<TimeSeries>(&v))
      for (const auto& p : ts->points) out += indent + "  " + format_iso8601(p.time) + " " + format_fixed4(p.value) + "\n";
  }

  std::string render(bool full) const {
    std::string out = "TASK " + task_id + "\n";
    out += "OBJECTS " + std::to_string(objects.size()) + "\n";
    for (const auto& o : objects) {
      out += "object " + o.object_id + "\n";
      out += "  type " + o.object_type + "\n";
      for (const auto& [k, v] : o.requested_params) value_lines(out, "  param ", k, v);
    }
    out += "SIMULATIONS " + std::to_string(simulations.size()) + "\n";
    for (const auto& s : simulations) {
      out += "simulation " + s.object_id + " " + s.package + "\n";
      out += s.ok ? std::string("  status ok\n") : "  status failed " + s.failure + "\n";
      out += "  provenance";
      for (const auto& f : s.provenance) out += " " + f;
      out += "\n";
      for (const auto& [k, v] : s.outputs) value_lines(out, "  output ", k, v);
      if (full) {
        if (s.executed_on) out += "  executed_on " + std::to_string(*s.executed_on) + "\n";
        out += "  wall_ms " + format_fixed4(s.wall_ms) + "\n";
      }
    }
    out += "DIAGNOSTICS\n";
    out += "  files_mapped " + std::to_string(diagnostics.files_mapped) + "\n";
    out += "  fragments " + std::to_string(diagnostics.fragments) + "\n";
    if (full) {
      out += "  nodes_used";
      for (const int n : diagnostics.nodes_used) out += " " + std::to_string(n);
      out += "\n";
    }
    return out;
  }
};

}  // namespace dslake::engine
