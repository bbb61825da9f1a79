#pragma once

#include <algorithm>
#include <string>
#include <string_view>
#include <vector>

#include "dslake/core/text.hpp"
#include "dslake/query/ast.hpp"
#include "dslake/query/lexer.hpp"

namespace dslake::query {

namespace detail {

// Grammar:
//   query    := header* statement+
//   header   := "area" coord "-" coord | "time" date "-" date
//   select   := "select" ident filter* ["out" "(" outlist ")"]
//   filter   := ident value
//   simulate := "simulate" "with" ident option* ["in" "(" bindings ")"] ["out" "(" outlist ")"]
//   option   := ident value
//   value    := ident | number | date | duration
//   bindings := [binding ("," binding)*]       binding := ident ":" expr
//   outlist  := [outitem ("," outitem)*]       outitem := ident ["[" expr ("," expr)* "]"]
//   expr     := primary [("+" | "-") duration] primary := ident | integer | date | duration
class Parser {
 public:
  explicit Parser(std::vector<Token> tokens) : toks_(std::move(tokens)) {
    if (!toks_.empty()) {
      const auto& last = toks_.back();
      end_loc_ = {last.line, last.col + static_cast<int>(last.text.size()) - 1};
    }
  }

  QueryAst run() {
    QueryAst ast;
    while (at_keyword("area") || at_keyword("time")) {
      if (at_keyword("area")) {
        if (ast.area) throw error("statement (area given twice)");
        ast.area = area();
      } else {
        if (ast.time) throw error("statement (time given twice)");
        ast.time = time_range();
      }
    }
    while (!done()) {
      if (at_keyword("select")) {
        ast.statements.emplace_back(select());
      } else if (at_keyword("simulate")) {
        ast.statements.emplace_back(simulate());
      } else {
        throw error(ast.statements.empty() ? "header or statement" : "statement");
      }
    }
    if (ast.statements.empty()) throw error("statement");
    return ast;
  }

 private:
  bool done() const { return pos_ >= toks_.size(); }
  const Token* cur() const { return done() ? nullptr : &toks_[pos_]; }

  bool at(TokenKind k) const { return !done() && toks_[pos_].kind == k; }
  bool at_keyword(std::string_view w) const { return !done() && toks_[pos_].is(TokenKind::Keyword, w); }
  bool at_punct(std::string_view p) const { return !done() && toks_[pos_].is(TokenKind::Punct, p); }

  SourceLoc loc() const { return done() ? end_loc_ : toks_[pos_].loc(); }

  ParseError error(std::string expected) const {
    return ParseError(loc(), std::move(expected), done() ? "end of input" : "'" + toks_[pos_].text + "'");
  }

  Token take() { return toks_[pos_++]; }

  Token expect(TokenKind k, std::string expected) {
    if (!at(k)) throw error(std::move(expected));
    return take();
  }

  void expect_keyword(std::string_view w) {
    if (!at_keyword(w)) throw error("'" + std::string(w) + "'");
    ++pos_;
  }

  void expect_punct(std::string_view p) {
    if (!at_punct(p)) throw error("'" + std::string(p) + "'");
    ++pos_;
  }

  std::pair<double, double> coord() {
    const auto t = expect(TokenKind::CoordPair, "coordinate pair lat,lon");
    const auto comma = t.text.find(',');
    const auto lat = parse_double(std::string_view(t.text).substr(0, comma));
    const auto lon = parse_double(std::string_view(t.text).substr(comma + 1));
    if (!lat || !lon || *lat < -90 || *lat > 90 || *lon < -180 || *lon > 180)
      throw ParseError(t.loc(), "coordinate within [-90,90]x[-180,180]", "'" + t.text + "'");
    return {*lat, *lon};
  }

  GeoBox area() {
    expect_keyword("area");
    const auto a = coord();
    expect_punct("-");
    const auto b = coord();
    return GeoBox{std::min(a.first, b.first), std::min(a.second, b.second), std::max(a.first, b.first),
                  std::max(a.second, b.second)};
  }

  TimePoint date() {
    const auto t = expect(TokenKind::Date, "date dd.mm.yyyy");
    const auto v = parse_dmy(t.text);
    if (!v) throw ParseError(t.loc(), "valid calendar date", "'" + t.text + "'");
    return *v;
  }

  TimeRange time_range() {
    expect_keyword("time");
    const auto from_loc = loc();
    const auto a = date();
    expect_punct("-");
    const auto b = date();
    if (b < a) throw ParseError(from_loc, "start date not after end date", format_dmy(a));
    return TimeRange{a, b};
  }

  bool at_value() const {
    return at(TokenKind::Ident) || at(TokenKind::Number) || at(TokenKind::Date) || at(TokenKind::Duration);
  }

  std::vector<Clause> clauses(const char* what) {
    std::vector<Clause> out;
    while (at(TokenKind::Ident)) {
      Clause c;
      c.loc = loc();
      c.keyword = take().text;
      if (!at_value()) throw error(std::string(what) + " value for '" + c.keyword + "'");
      c.value = take().text;
      out.push_back(std::move(c));
    }
    return out;
  }

  SelectStmt select() {
    SelectStmt s;
    s.loc = loc();
    expect_keyword("select");
    s.object_type = expect(TokenKind::Ident, "object type").text;
    s.filters = clauses("filter");
    if (at_keyword("out")) s.out = out_list();
    return s;
  }

  SimulateStmt simulate() {
    SimulateStmt s;
    s.loc = loc();
    expect_keyword("simulate");
    expect_keyword("with");
    s.package = expect(TokenKind::Ident, "package name").text;
    s.options = clauses("option");
    if (at_keyword("in")) {
      ++pos_;
      expect_punct("(");
      if (!at_punct(")")) {
        for (;;) {
          Binding b;
          b.loc = loc();
          b.name = expect(TokenKind::Ident, "input name").text;
          expect_punct(":");
          b.expr = expr();
          s.in_bindings.push_back(std::move(b));
          if (!at_punct(",")) break;
          ++pos_;
        }
      }
      expect_punct(")");
    }
    if (at_keyword("out")) s.out = out_list();
    return s;
  }

  std::vector<OutItem> out_list() {
    expect_keyword("out");
    expect_punct("(");
    std::vector<OutItem> items;
    if (!at_punct(")")) {
      for (;;) {
        OutItem item;
        item.loc = loc();
        item.name = expect(TokenKind::Ident, "output name").text;
        if (at_punct("[")) {
          ++pos_;
          for (;;) {
            item.indices.push_back(expr());
            if (!at_punct(",")) break;
            ++pos_;
          }
          expect_punct("]");
        }
        items.push_back(std::move(item));
        if (!at_punct(",")) break;
        ++pos_;
      }
    }
    expect_punct(")");
    return items;
  }

  static std::int64_t duration_hours(const Token& t) {
    const auto n = parse_int(std::string_view(t.text).substr(0, t.text.size() - 1));
    if (!n || *n > 24 * 365 * 1000) throw ParseError(t.loc(), "duration of at most 1000 years", "'" + t.text + "'");
    return t.text.back() == 'd' ? *n * 24 : *n;
  }

  Expr expr() {
    Expr base;
    if (at(TokenKind::Ident)) {
      const auto t = take();
      base.node = Ref{t.text, t.loc()};
    } else if (at(TokenKind::Number)) {
      const auto t = take();
      const auto v = parse_int(t.text);
      if (!v || *v < 0) throw ParseError(t.loc(), "non-negative integer", "'" + t.text + "'");
      base.node = IntLit{*v};
    } else if (at(TokenKind::Date)) {
      base.node = DateLit{date()};
    } else if (at(TokenKind::Duration)) {
      base.node = DurationLit{duration_hours(take())};
    } else {
      throw error("expression");
    }

    if (at_punct("-") || at_punct("+")) {
      const int sign = toks_[pos_].text == "-" ? -1 : +1;
      const auto op_loc = loc();
      ++pos_;
      const auto d = expect(TokenKind::Duration, "duration after '" + std::string(sign < 0 ? "-" : "+") + "'");
      Offset off;
      off.sign = sign;
      off.delta = DurationLit{duration_hours(d)};
      if (auto* r = std::get_if<Ref>(&base.node)) {
        off.base = *r;
      } else if (auto* dl = std::get_if<DateLit>(&base.node)) {
        off.base = *dl;
      } else {
        throw ParseError(op_loc, "offset applied to a reference or date", "other operand");
      }
      base.node = std::move(off);
    }
    return base;
  }

  std::vector<Token> toks_;
  std::size_t pos_ = 0;
  SourceLoc end_loc_{1, 1};
};

}  // namespace detail

/// Parses a script into an AST. Throws ParseError (LexError for lexical
/// faults) with the position of the offending token.
inline QueryAst parse(std::string_view script) { return detail::Parser(tokenize(script)).run(); }

}  // namespace dslake::query
