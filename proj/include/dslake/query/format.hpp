#pragma once

#include <string>

#include "dslake/core/text.hpp"
#include "dslake/query/ast.hpp"

namespace dslake::query {

inline std::string format_expr(const Expr& e) {
  struct V {
    std::string operator()(const Ref& r) const { return r.name; }
    std::string operator()(const IntLit& i) const { return std::to_string(i.value); }
    std::string operator()(const DateLit& d) const { return format_dmy(d.value); }
    std::string operator()(const DurationLit& d) const { return std::to_string(d.hours) + "h"; }
    std::string operator()(const Offset& o) const {
      std::string base = std::holds_alternative<Ref>(o.base) ? std::get<Ref>(o.base).name
                                                             : format_dmy(std::get<DateLit>(o.base).value);
      return base + (o.sign < 0 ? " - " : " + ") + (*this)(o.delta);
    }
  };
  return std::visit(V{}, e.node);
}

/// `name` or `name[i,j]`; also the key under which results are reported.
inline std::string format_out_item(const OutItem& item) {
  std::string s = item.name;
  if (!item.indices.empty()) {
    s += '[';
    for (std::size_t i = 0; i < item.indices.size(); ++i) {
      if (i) s += ',';
      s += format_expr(item.indices[i]);
    }
    s += ']';
  }
  return s;
}

namespace detail {

inline std::string format_out_list(const std::vector<OutItem>& items) {
  std::string s = "out(";
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i) s += ", ";
    s += format_out_item(items[i]);
  }
  return s + ")";
}

}  // namespace detail

/// Canonical layout: headers first (area, then time), a blank line, then each
/// statement with one clause per line indented by two spaces and a blank line
/// between statements.
inline std::string format(const QueryAst& ast) {
  std::string out;
  if (ast.area) {
    const auto& a = *ast.area;
    out += "area " + format_shortest(a.south) + "," + format_shortest(a.west) + " - " + format_shortest(a.north) +
           "," + format_shortest(a.east) + "\n";
  }
  if (ast.time) out += "time " + format_dmy(ast.time->first) + " - " + format_dmy(ast.time->last) + "\n";

  bool first = true;
  for (const auto& st : ast.statements) {
    if (!first || !out.empty()) out += "\n";
    first = false;
    if (const auto* sel = std::get_if<SelectStmt>(&st)) {
      out += "select " + sel->object_type + "\n";
      for (const auto& f : sel->filters) out += "  " + f.keyword + " " + f.value + "\n";
      if (!sel->out.empty()) out += "  " + detail::format_out_list(sel->out) + "\n";
    } else {
      const auto& sim = std::get<SimulateStmt>(st);
      out += "simulate with " + sim.package + "\n";
      for (const auto& o : sim.options) out += "  " + o.keyword + " " + o.value + "\n";
      if (!sim.in_bindings.empty()) {
        out += "  in(";
        for (std::size_t i = 0; i < sim.in_bindings.size(); ++i) {
          if (i) out += ", ";
          out += sim.in_bindings[i].name + ": " + format_expr(sim.in_bindings[i].expr);
        }
        out += ")\n";
      }
      if (!sim.out.empty()) out += "  " + detail::format_out_list(sim.out) + "\n";
    }
  }
  return out;
}

}  // namespace dslake::query
