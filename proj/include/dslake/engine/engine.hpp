#pragma once

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <exception>
#include <iterator>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <thread>
#include <tuple>
#include <vector>

#include "dslake/core/digest.hpp"
#include "dslake/core/error.hpp"
#include "dslake/core/random.hpp"
#include "dslake/engine/result_document.hpp"
#include "dslake/exec/binding.hpp"
#include "dslake/exec/hybrid.hpp"
#include "dslake/knowledge/registry.hpp"
#include "dslake/query/format.hpp"
#include "dslake/query/parser.hpp"
#include "dslake/query/validate.hpp"
#include "dslake/storage/layout.hpp"

namespace dslake::engine {

struct EngineConfig {
  int node_count = 0;         // 0: take the layout's; otherwise must match it
  int replication = 0;        // likewise
  int max_parallel_maps = 0;  // 0: one mapper per node
  std::optional<std::uint64_t> scheduler_seed;  // shuffles map dispatch order
};

/// A task: the script travels with the request.
struct TaskRequest {
  std::string dataset;
  std::string script;
  ParamMap extra_params;
  EngineConfig engine_config;
};

/// Digest of what determines the result: script, dataset name and contents,
/// extra parameters. Engine configuration is deliberately left out.
inline std::string make_task_id(const TaskRequest& req, const std::vector<storage::FileEntry>& files) {
  std::uint64_t h = kFnvOffsetBasis;
  auto feed = [&](std::string_view s) {
    h = fnv1a64(s, h);
    h = fnv1a64(std::string_view("\0", 1), h);
  };
  feed(req.script);
  feed(req.dataset);
  for (const auto& [k, v] : req.extra_params) {
    feed(k);
    feed(v);
  }
  std::vector<std::string> ids;
  for (const auto& f : files) ids.push_back(f.file_id);
  std::sort(ids.begin(), ids.end());
  for (const auto& id : ids) feed(id);
  return hex64(h);
}

inline ProcedureContext make_context(const query::ValidatedQuery& vq, const ParamMap& extra) {
  return ProcedureContext{vq.ast.area, vq.ast.time, extra};
}

/// File kinds the query's stages read, in first-use order.
inline std::vector<std::string> source_kinds(const query::ValidatedQuery& vq) {
  std::vector<std::string> kinds;
  for (const auto& st : vq.stages)
    if (std::find(kinds.begin(), kinds.end(), st.object.source_kind) == kinds.end())
      kinds.push_back(st.object.source_kind);
  return kinds;
}

inline std::string extractor_for(const query::ValidatedQuery& vq, const KnowledgeRegistry& registry,
                                 const std::string& kind) {
  for (const auto& st : vq.stages)
    if (st.object.source_kind == kind) return registry.libraries().at(st.library).extractors.at(kind);
  throw Error(Errc::UnknownProcedure, "no extractor for file kind '" + kind + "'");
}

/// Map step for one file: runs the extractor of every file kind the query
/// needs over this file's bytes alone. Files outside the time header produce
/// empty fragments without running anything.
inline std::vector<Fragment> run_map(int node, const storage::FileEntry& file, std::string_view bytes,
                                     const query::ValidatedQuery& vq, const KnowledgeRegistry& registry,
                                     const ProcedureContext& ctx) {
  std::vector<Fragment> out;
  const bool in_time = !ctx.time || ctx.time->overlaps(file.t0, file.t1);
  for (const auto& kind : source_kinds(vq)) {
    Fragment f{file.file_id, kind, node, file.t0, file.t1, {}};
    if (in_time) {
      try {
        f.payload = registry.procedures().extractor(extractor_for(vq, registry, kind))(bytes, ctx);
      } catch (const std::exception& e) {
        throw Error(Errc::ExtractorFailure, file.file_id + ": " + e.what());
      }
      for (const auto& item : f.payload)
        if (item.timestamp < f.t0 || item.timestamp > f.t1)
          throw Error(Errc::ExtractorFailure, file.file_id + ": item time outside the file's range");
    }
    out.push_back(std::move(f));
  }
  return out;
}

/// Sorted by (t0, file_id); stable.
inline std::vector<Fragment> canonical_order(std::vector<Fragment> fragments) {
  std::stable_sort(fragments.begin(), fragments.end(), [](const Fragment& a, const Fragment& b) {
    return std::tie(a.t0, a.file_id) < std::tie(b.t0, b.file_id);
  });
  return fragments;
}

namespace detail {

inline Value requested_value(const DomainObject& obj, const query::OutItem& item) {
  const auto it = obj.params.find(item.name);
  if (it == obj.params.end())
    throw Error(Errc::CombinerFailure, "object " + obj.object_id + " lacks parameter '" + item.name + "'");
  if (item.indices.empty()) return it->second.value;
  const auto* rec = std::get_if<Record>(&it->second.value);
  if (!rec) throw Error(Errc::CombinerFailure, "parameter '" + item.name + "' of " + obj.object_id + " is not a record");
  Record sub;
  for (const auto& idx : item.indices) {
    const auto& field = std::get<query::Ref>(idx.node).name;
    const auto f = rec->fields.find(field);
    if (f == rec->fields.end())
      throw Error(Errc::CombinerFailure, "record '" + item.name + "' of " + obj.object_id + " lacks " + field);
    if (item.indices.size() == 1) return to_value(f->second);
    sub.fields[field] = f->second;
  }
  return sub;
}

inline std::map<std::string, TypedValue> bind_for(const query::SimulationPlan& plan, const DomainObject& obj) {
  std::map<std::string, TypedValue> b;
  for (const auto& ib : plan.bindings) {
    switch (ib.source) {
      case query::BindingSource::Expression:
        b[ib.input] = exec::evaluate_binding(*ib.expr, obj.params);
        break;
      case query::BindingSource::ObjectParam: {
        const auto it = obj.params.find(ib.object_param);
        if (it == obj.params.end())
          throw Error(Errc::UnboundReference, "'" + ib.object_param + "' of " + obj.object_id);
        b[ib.input] = it->second;
        break;
      }
      case query::BindingSource::Default:
        b[ib.input] = exec::parse_literal(ib.type, *ib.default_text);
        break;
    }
  }
  return b;
}

}  // namespace detail

/// Reduce step over canonically ordered fragments: combine, filter, evaluate
/// out items, fan simulations out per object. A failing package call is
/// recorded on its object and the others carry on.
inline ResultDocument run_reduce(const std::vector<Fragment>& fragments, const query::ValidatedQuery& vq,
                                 const KnowledgeRegistry& registry, const ProcedureContext& ctx,
                                 const std::string& task_id = {}) {
  ResultDocument doc;
  doc.task_id = task_id;
  doc.diagnostics.fragments = static_cast<int>(fragments.size());
  for (const auto& stage : vq.stages) {
    const auto& kind = stage.object.source_kind;
    std::vector<Fragment> subset;
    const bool all_mine =
        std::all_of(fragments.begin(), fragments.end(), [&](const Fragment& f) { return f.source_kind == kind; });
    if (!all_mine)
      std::copy_if(fragments.begin(), fragments.end(), std::back_inserter(subset),
                   [&](const Fragment& f) { return f.source_kind == kind; });
    const std::span<const Fragment> mine = all_mine ? std::span<const Fragment>(fragments) : subset;

    const auto& lib = registry.libraries().at(stage.library);
    std::vector<DomainObject> objects;
    try {
      objects = registry.procedures().combiner(lib.combiners.at(stage.object.name))(mine, ctx);
    } catch (const Error& e) {
      if (e.code() == Errc::CombinerFailure) throw;
      throw Error(Errc::CombinerFailure, stage.object.name + ": " + e.what());
    } catch (const std::exception& e) {
      throw Error(Errc::CombinerFailure, stage.object.name + ": " + e.what());
    }

    for (const auto& obj : objects) {
      const bool keep = std::all_of(stage.filters.begin(), stage.filters.end(), [&](const query::FilterBinding& f) {
        return registry.procedures().filter(f.procedure)(obj, f.value);
      });
      if (!keep) continue;

      ObjectEntry entry{obj.object_id, obj.object_type, {}};
      if (stage.out.empty()) {
        for (const auto& [name, tv] : obj.params) entry.requested_params[name] = tv.value;
      } else {
        for (const auto& item : stage.out) entry.requested_params[query::format_out_item(item)] = detail::requested_value(obj, item);
      }
      doc.objects.push_back(std::move(entry));

      if (!stage.simulation) continue;
      const auto& plan = *stage.simulation;
      SimulationEntry sim;
      sim.object_id = obj.object_id;
      sim.package = plan.package.name;
      sim.provenance = obj.provenance;
      try {
        exec::PackageInvocation inv;
        inv.package = &plan.package;
        inv.bindings = detail::bind_for(plan, obj);
        inv.requests = plan.requests;
        if (plan.package.placement == Placement::OnNode) inv.placement_node = obj.home_node;
        inv.object_id = obj.object_id;
        inv.task_id = task_id;
        auto out = exec::invoke(inv, registry);
        sim.ok = out.ok();
        sim.failure = out.reason;
        sim.outputs = std::move(out.outputs);
        sim.executed_on = out.executed_on;
        sim.wall_ms = std::chrono::duration<double, std::milli>(out.wall_time).count();
      } catch (const Error& e) {
        sim.ok = false;
        sim.failure = e.what();
      }
      doc.simulations.push_back(std::move(sim));
    }
  }
  doc.sort();
  return doc;
}

/// Runs tasks over one layout and registry, one submit at a time.
class Engine {
 public:
  Engine(const KnowledgeRegistry& registry, const storage::StorageLayout& layout)
      : registry_(registry), layout_(layout) {}

  ResultDocument submit(const TaskRequest& req) {
    std::lock_guard lock(mu_);
    if (trim(req.script).empty()) throw Error(Errc::ConfigError, "empty script");
    const auto vq = query::validate(query::parse(req.script), registry_);
    const auto& cfg = req.engine_config;
    if (cfg.node_count != 0 && cfg.node_count != layout_.node_count())
      throw Error(Errc::ConfigError, "task asks for " + std::to_string(cfg.node_count) + " nodes, storage has " +
                                         std::to_string(layout_.node_count()));
    if (cfg.replication != 0 && cfg.replication != layout_.replication())
      throw Error(Errc::ConfigError, "task asks for replication " + std::to_string(cfg.replication) +
                                         ", storage has " + std::to_string(layout_.replication()));
    if (cfg.max_parallel_maps < 0) throw Error(Errc::ConfigError, "max_parallel_maps must be non-negative");
    if (!layout_.has_dataset(req.dataset)) throw Error(Errc::UnknownDataset, "'" + req.dataset + "'");

    const auto files = layout_.dataset_files(req.dataset);
    const auto task_id = make_task_id(req, files);
    const auto ctx = make_context(vq, req.extra_params);
    auto fragments = map_all(files, vq, ctx, cfg);
    std::set<int> nodes;
    for (const auto& f : fragments) nodes.insert(f.node);

    auto doc = run_reduce(canonical_order(std::move(fragments)), vq, registry_, ctx, task_id);
    doc.diagnostics.files_mapped = static_cast<int>(files.size());
    doc.diagnostics.nodes_used = std::move(nodes);
    return doc;
  }

 private:
  std::vector<Fragment> map_one(const storage::FileEntry& file, const query::ValidatedQuery& vq,
                                const ProcedureContext& ctx) const {
    if (ctx.time && !ctx.time->overlaps(file.t0, file.t1)) {
      int node = -1;
      for (const int n : layout_.placement(file.file_id))
        if (!layout_.is_failed(n)) {
          node = n;
          break;
        }
      return run_map(node, file, {}, vq, registry_, ctx);
    }
    const auto replica = layout_.read(file.file_id);
    return run_map(replica.node, file, *replica.bytes, vq, registry_, ctx);
  }

  std::vector<Fragment> map_all(const std::vector<storage::FileEntry>& files, const query::ValidatedQuery& vq,
                                const ProcedureContext& ctx, const EngineConfig& cfg) const {
    std::vector<std::size_t> order(files.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    if (cfg.scheduler_seed) seeded_shuffle(order, *cfg.scheduler_seed);

    std::vector<std::vector<Fragment>> results(files.size());
    std::vector<std::exception_ptr> errors(files.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
      for (std::size_t k; (k = next.fetch_add(1)) < order.size();) {
        const std::size_t i = order[k];
        try {
          results[i] = map_one(files[i], vq, ctx);
        } catch (...) {
          errors[i] = std::current_exception();
        }
      }
    };
    const int parallel = cfg.max_parallel_maps > 0 ? cfg.max_parallel_maps : layout_.node_count();
    const std::size_t n_threads = std::min<std::size_t>(static_cast<std::size_t>(parallel), files.size());
    if (n_threads <= 1) {
      worker();
    } else {
      std::vector<std::thread> pool;
      for (std::size_t t = 0; t < n_threads; ++t) pool.emplace_back(worker);
      for (auto& th : pool) th.join();
    }

    // Report the failure of the earliest file in canonical order.
    std::optional<std::size_t> first_err;
    for (std::size_t i = 0; i < files.size(); ++i)
      if (errors[i] && (!first_err || std::tie(files[i].t0, files[i].file_id) <
                                          std::tie(files[*first_err].t0, files[*first_err].file_id)))
        first_err = i;
    if (first_err) std::rethrow_exception(errors[*first_err]);

    std::vector<Fragment> out;
    for (auto& r : results)
      for (auto& f : r) out.push_back(std::move(f));
    return out;
  }

  const KnowledgeRegistry& registry_;
  const storage::StorageLayout& layout_;
  std::mutex mu_;
};

/// One-shot submit.
inline ResultDocument submit(const TaskRequest& request, const KnowledgeRegistry& registry,
                             const storage::StorageLayout& layout) {
  Engine engine(registry, layout);
  return engine.submit(request);
}

}  // namespace dslake::engine
