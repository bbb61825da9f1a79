#pragma once

#include <optional>
#include <set>
#include <string>
#include <vector>

#include "dslake/core/error.hpp"
#include "dslake/knowledge/registry.hpp"
#include "dslake/query/ast.hpp"
#include "dslake/query/format.hpp"

namespace dslake::query {

struct FilterBinding {
  std::string keyword;  // canonical
  std::string value;
  std::string procedure;
  SourceLoc loc;
};

enum class BindingSource {
  Expression,   // written in the `in(...)` clause
  ObjectParam,  // filled from the selected object's parameter of the same semantic type
  Default,      // descriptor default
};

/// How one package input gets its value for each selected object.
struct InputBinding {
  std::string input;
  std::string type;
  BindingSource source = BindingSource::Expression;
  std::optional<Expr> expr;
  std::string object_param;                 // for ObjectParam
  std::optional<std::string> default_text;  // for Default
  bool per_object = false;                  // value depends on the object
};

struct SimulationPlan {
  PackageDescriptor package;
  bool semantic_association = false;
  std::vector<InputBinding> bindings;
  std::vector<OutputRequest> requests;
};

/// A select statement and the simulate statement (if any) consuming it.
struct Stage {
  ObjectTypeInfo object;
  std::string library;
  std::vector<FilterBinding> filters;
  std::vector<OutItem> out;
  std::optional<SimulationPlan> simulation;
};

struct ValidatedQuery {
  QueryAst ast;
  std::vector<Stage> stages;
  std::set<std::string> resolved_names;  // every identifier of the AST, as written

  const ObjectTypeInfo& resolved_object() const { return stages.front().object; }
};

namespace detail {

inline std::string type_of_literal(const Expr& e) {
  if (std::holds_alternative<IntLit>(e.node)) return "int";
  if (std::holds_alternative<DurationLit>(e.node)) return "duration";
  return "datetime";
}

inline void collect_refs(const Expr& e, std::vector<Ref>& out) {
  if (const auto* r = std::get_if<Ref>(&e.node)) out.push_back(*r);
  if (const auto* o = std::get_if<Offset>(&e.node))
    if (const auto* r = std::get_if<Ref>(&o->base)) out.push_back(*r);
}

class Validator {
 public:
  Validator(const QueryAst& ast, const KnowledgeRegistry& reg) : ast_(ast), reg_(reg) {}

  ValidatedQuery run() {
    ValidatedQuery vq;
    vq.ast = ast_;
    for (const auto& st : ast_.statements) {
      if (const auto* sel = std::get_if<SelectStmt>(&st)) {
        vq.stages.push_back(select(*sel, vq.resolved_names));
      } else {
        const auto& sim = std::get<SimulateStmt>(st);
        if (vq.stages.empty() || vq.stages.back().simulation)
          throw ValidationError(Errc::OrphanSimulate, sim.package, sim.loc,
                                "has no preceding select whose results it could consume");
        vq.stages.back().simulation = simulate(sim, vq.stages.back(), vq.resolved_names);
      }
    }
    return vq;
  }

 private:
  Stage select(const SelectStmt& s, std::set<std::string>& names) {
    names.insert(s.object_type);
    if (!reg_.has_object(s.object_type))
      throw ValidationError(Errc::UnknownObjectType, s.object_type, s.loc);
    Stage stage;
    stage.object = reg_.resolve_object(s.object_type);
    stage.library = reg_.library_of(stage.object.name).name;
    if (stage.object.level != StructureLevel::HighLevel)
      throw ValidationError(Errc::UnsupportedObjectLevel, s.object_type, s.loc,
                            "is not a high-level structure and cannot be selected");

    for (const auto& f : s.filters) {
      names.insert(f.keyword);
      const auto keyword = reg_.canonical_keyword(f.keyword);
      const auto proc = reg_.filter_procedure(stage.object.name, keyword);
      if (!proc) throw ValidationError(Errc::UnknownFilterKeyword, f.keyword, f.loc, "for " + stage.object.name);
      stage.filters.push_back(FilterBinding{keyword, f.value, *proc, f.loc});
    }

    for (const auto& item : s.out) {
      names.insert(item.name);
      const auto* p = stage.object.find_param(item.name);
      if (!p) throw ValidationError(Errc::UnknownOutputParameter, item.name, item.loc, "of " + stage.object.name);
      if (!item.indices.empty() && !p->composite)
        throw ValidationError(Errc::UnknownOutputParameter, item.name, item.loc, "is not a composite parameter");
      for (const auto& idx : item.indices) {
        const auto* r = std::get_if<Ref>(&idx.node);
        if (!r) throw ValidationError(Errc::TypeMismatch, format_expr(idx), item.loc, "index must name a parameter");
        names.insert(r->name);
        const auto* field = stage.object.find_param(r->name);
        if (!field || field->composite)
          throw ValidationError(Errc::UnknownOutputParameter, r->name, r->loc, "is not a field of " + item.name);
      }
      stage.out.push_back(item);
    }
    return stage;
  }

  SimulationPlan simulate(const SimulateStmt& s, const Stage& stage, std::set<std::string>& names) {
    names.insert(s.package);
    if (!reg_.has_package(s.package)) throw ValidationError(Errc::UnknownPackage, s.package, s.loc);
    SimulationPlan plan;
    plan.package = reg_.resolve_package(s.package);
    const auto& pkg = plan.package;

    for (const auto& o : s.options) {
      names.insert(o.keyword);
      const auto keyword = reg_.canonical_keyword(o.keyword);
      if (keyword != "semantic_association")
        throw ValidationError(Errc::InvalidOption, o.keyword, o.loc, "is not a simulate option");
      if (o.value != "yes" && o.value != "no")
        throw ValidationError(Errc::InvalidOption, o.value, o.loc, "semantic_association takes yes or no");
      plan.semantic_association = o.value == "yes";
    }

    std::set<std::string> bound;
    for (const auto& b : s.in_bindings) {
      names.insert(b.name);
      const auto* in = pkg.find_input(b.name);
      if (!in) throw ValidationError(Errc::UnknownPackageInput, b.name, b.loc, "of package " + pkg.name);
      if (!bound.insert(b.name).second)
        throw ValidationError(Errc::UnknownPackageInput, b.name, b.loc, "is bound twice");

      std::vector<Ref> refs;
      collect_refs(b.expr, refs);
      std::string type = type_of_literal(b.expr);
      for (const auto& r : refs) {
        names.insert(r.name);
        if (!plan.semantic_association)
          throw ValidationError(Errc::UnboundReference, r.name, r.loc,
                                "needs 'semantic_association yes' to bind object parameters");
        const auto* p = stage.object.find_param(r.name);
        if (!p) throw ValidationError(Errc::UnboundReference, r.name, r.loc, "is not a parameter of " + stage.object.name);
        if (std::holds_alternative<Offset>(b.expr.node) && p->type != "datetime")
          throw ValidationError(Errc::TypeMismatch, r.name, r.loc, "duration offsets apply to datetimes only");
        if (std::holds_alternative<Ref>(b.expr.node)) type = p->type;
      }
      if (type != in->type)
        throw ValidationError(Errc::TypeMismatch, b.name, b.loc, "expects " + in->type + ", got " + type);

      InputBinding ib;
      ib.input = in->name;
      ib.type = in->type;
      ib.source = BindingSource::Expression;
      ib.expr = b.expr;
      ib.per_object = !refs.empty();
      plan.bindings.push_back(std::move(ib));
    }

    for (const auto& in : pkg.inputs) {
      if (bound.count(in.name)) continue;
      InputBinding ib;
      ib.input = in.name;
      ib.type = in.type;
      if (plan.semantic_association && in.required) {
        if (const auto* p = implicit_param(stage.object, in)) {
          ib.source = BindingSource::ObjectParam;
          ib.object_param = p->name;
          ib.per_object = true;
          plan.bindings.push_back(std::move(ib));
          continue;
        }
      }
      if (in.default_value) {
        ib.source = BindingSource::Default;
        ib.default_text = in.default_value;
        plan.bindings.push_back(std::move(ib));
      } else if (in.required) {
        throw ValidationError(Errc::MissingInput, in.name, s.loc, "of package " + pkg.name + " is not bound");
      }
    }

    for (const auto& item : s.out) {
      names.insert(item.name);
      const auto* o = pkg.find_output(item.name);
      if (!o) throw ValidationError(Errc::UnknownOutputParameter, item.name, item.loc, "of package " + pkg.name);
      if (!item.indices.empty() && !o->indexable)
        throw ValidationError(Errc::UnknownOutputParameter, item.name, item.loc, "is not indexable");
      OutputRequest req{item.name, {}, format_out_item(item)};
      for (const auto& idx : item.indices) {
        const auto* lit = std::get_if<IntLit>(&idx.node);
        if (!lit) throw ValidationError(Errc::TypeMismatch, format_expr(idx), item.loc, "output index must be an integer");
        req.indices.push_back(lit->value);
      }
      plan.requests.push_back(std::move(req));
    }
    if (s.out.empty())
      for (const auto& o : pkg.outputs) plan.requests.push_back(OutputRequest{o.name, {}, o.name});
    return plan;
  }

  // Unique parameter of the same semantic type, else one with the same name.
  static const OutputParam* implicit_param(const ObjectTypeInfo& obj, const PackageInput& in) {
    const OutputParam* match = nullptr;
    int count = 0;
    for (const auto& p : obj.output_params)
      if (p.type == in.type) {
        match = &p;
        ++count;
      }
    if (count == 1) return match;
    const auto* same = obj.find_param(in.name);
    return same && same->type == in.type ? same : nullptr;
  }

  const QueryAst& ast_;
  const KnowledgeRegistry& reg_;
};

}  // namespace detail

/// Resolves every name of the AST against the registry and plans how the
/// simulate inputs are fed from the selected objects.
inline ValidatedQuery validate(const QueryAst& ast, const KnowledgeRegistry& registry) {
  return detail::Validator(ast, registry).run();
}

/// The same AST with object types and keywords replaced by their canonical
/// spellings. Names the registry does not know are left as written.
inline QueryAst canonicalize(QueryAst ast, const KnowledgeRegistry& registry) {
  for (auto& st : ast.statements) {
    if (auto* sel = std::get_if<SelectStmt>(&st)) {
      if (registry.has_object(sel->object_type)) sel->object_type = registry.resolve_object(sel->object_type).name;
      for (auto& f : sel->filters) f.keyword = registry.canonical_keyword(f.keyword);
    } else {
      for (auto& o : std::get<SimulateStmt>(st).options) o.keyword = registry.canonical_keyword(o.keyword);
    }
  }
  return ast;
}

}  // namespace dslake::query
