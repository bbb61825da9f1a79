#pragma once

#include <chrono>
#include <map>
#include <string>

#include "dslake/core/error.hpp"
#include "dslake/core/value.hpp"
#include "dslake/query/ast.hpp"

namespace dslake::exec {

using ObjectParams = std::map<std::string, TypedValue>;

/// Value of an `in(...)` expression for one object. Offsets are exact
/// integer-hour arithmetic on UTC time points.
inline TypedValue evaluate_binding(const query::Expr& expr, const ObjectParams& params) {
  auto ref = [&](const query::Ref& r) -> const TypedValue& {
    const auto it = params.find(r.name);
    if (it == params.end()) throw Error(Errc::UnboundReference, "'" + r.name + "' at " + to_string(r.loc));
    return it->second;
  };
  struct V {
    decltype(ref)& lookup;
    TypedValue operator()(const query::Ref& r) const { return lookup(r); }
    TypedValue operator()(const query::IntLit& i) const { return {"int", i.value}; }
    TypedValue operator()(const query::DateLit& d) const { return {"datetime", d.value}; }
    TypedValue operator()(const query::DurationLit& d) const { return {"duration", Hours{d.hours}}; }
    TypedValue operator()(const query::Offset& o) const {
      TypedValue base = std::holds_alternative<query::Ref>(o.base)
                            ? lookup(std::get<query::Ref>(o.base))
                            : TypedValue{"datetime", std::get<query::DateLit>(o.base).value};
      const auto* t = std::get_if<TimePoint>(&base.value);
      if (!t) throw Error(Errc::TypeMismatch, "duration offsets apply to datetimes only");
      const Hours delta{o.delta.hours};
      return {base.type, o.sign < 0 ? *t - delta : *t + delta};
    }
  };
  return std::visit(V{ref}, expr.node);
}

/// Typed value of a textual literal, e.g. a descriptor default.
inline TypedValue parse_literal(const std::string& type, std::string_view text) {
  if (type == "int") {
    if (const auto v = parse_int(text)) return {type, *v};
  } else if (type == "datetime") {
    if (const auto v = parse_iso8601(text)) return {type, *v};
    if (const auto v = parse_dmy(text)) return {type, *v};
  } else if (type == "duration") {
    if (text.size() > 1 && (text.back() == 'h' || text.back() == 'd'))
      if (const auto v = parse_int(text.substr(0, text.size() - 1)))
        return {type, Hours{text.back() == 'd' ? *v * 24 : *v}};
  } else {
    if (const auto v = parse_int(text)) return {type, *v};
    if (const auto v = parse_double(text)) return {type, *v};
    return {type, std::string(text)};
  }
  throw Error(Errc::BindingError, "'" + std::string(text) + "' is not a valid " + type);
}

}  // namespace dslake::exec
