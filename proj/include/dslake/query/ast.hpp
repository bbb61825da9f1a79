#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "dslake/core/error.hpp"
#include "dslake/core/region.hpp"
#include "dslake/core/time.hpp"

namespace dslake::query {

// Source locations are carried for diagnostics; SourceLoc compares equal to
// every other location, so the defaulted operator== below is structural.

struct Ref {
  std::string name;
  SourceLoc loc;
  friend bool operator==(const Ref&, const Ref&) = default;
};

struct IntLit {
  std::int64_t value = 0;
  friend bool operator==(const IntLit&, const IntLit&) = default;
};

struct DateLit {
  TimePoint value;
  friend bool operator==(const DateLit&, const DateLit&) = default;
};

/// `48h` or `2d`; both forms normalise to hours.
struct DurationLit {
  std::int64_t hours = 0;
  friend bool operator==(const DurationLit&, const DurationLit&) = default;
};

/// `base ± duration`, where base is a reference or a date.
struct Offset {
  std::variant<Ref, DateLit> base;
  int sign = -1;
  DurationLit delta;
  friend bool operator==(const Offset&, const Offset&) = default;
};

struct Expr {
  std::variant<Ref, IntLit, DateLit, DurationLit, Offset> node;
  friend bool operator==(const Expr&, const Expr&) = default;
};

struct OutItem {
  std::string name;
  std::vector<Expr> indices;
  SourceLoc loc;
  friend bool operator==(const OutItem&, const OutItem&) = default;
};

/// keyword/value pair of a select filter or a simulate option.
struct Clause {
  std::string keyword;
  std::string value;
  SourceLoc loc;
  friend bool operator==(const Clause&, const Clause&) = default;
};

struct Binding {
  std::string name;
  Expr expr;
  SourceLoc loc;
  friend bool operator==(const Binding&, const Binding&) = default;
};

struct SelectStmt {
  std::string object_type;
  std::vector<Clause> filters;
  std::vector<OutItem> out;
  SourceLoc loc;
  friend bool operator==(const SelectStmt&, const SelectStmt&) = default;
};

struct SimulateStmt {
  std::string package;
  std::vector<Clause> options;
  std::vector<Binding> in_bindings;
  std::vector<OutItem> out;
  SourceLoc loc;
  friend bool operator==(const SimulateStmt&, const SimulateStmt&) = default;
};

using Statement = std::variant<SelectStmt, SimulateStmt>;

struct QueryAst {
  std::optional<GeoBox> area;
  std::optional<TimeRange> time;
  std::vector<Statement> statements;
  friend bool operator==(const QueryAst&, const QueryAst&) = default;
};

}  // namespace dslake::query
