#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "dslake/core/error.hpp"

namespace dslake::query {

enum class TokenKind { Keyword, Ident, Number, Date, Duration, CoordPair, Punct };

inline std::string_view token_kind_name(TokenKind k) {
  switch (k) {
    case TokenKind::Keyword: return "keyword";
    case TokenKind::Ident: return "identifier";
    case TokenKind::Number: return "number";
    case TokenKind::Date: return "date";
    case TokenKind::Duration: return "duration";
    case TokenKind::CoordPair: return "coordinate pair";
    case TokenKind::Punct: return "punctuation";
  }
  return "token";
}

struct Token {
  TokenKind kind;
  std::string text;
  int line = 1;
  int col = 1;

  SourceLoc loc() const noexcept { return {line, col}; }
  bool is(TokenKind k, std::string_view t) const noexcept { return kind == k && text == t; }
};

inline bool is_keyword(std::string_view w) {
  return w == "area" || w == "time" || w == "select" || w == "simulate" || w == "with" || w == "in" ||
         w == "out";
}

namespace detail {

inline bool is_alpha(char c) { return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z'); }
inline bool is_digit(char c) { return c >= '0' && c <= '9'; }
inline bool is_ident_char(char c) { return is_alpha(c) || is_digit(c) || c == '_'; }

class Lexer {
 public:
  explicit Lexer(std::string_view src) : src_(src) {}

  std::vector<Token> run() {
    std::vector<Token> out;
    while (pos_ < src_.size()) {
      const char c = src_[pos_];
      if (c == ' ' || c == '\t' || c == '\r') {
        advance();
      } else if (c == '\n') {
        advance();
      } else if (c == '#') {
        while (pos_ < src_.size() && src_[pos_] != '\n') advance();
      } else if (is_alpha(c) || c == '_') {
        out.push_back(ident());
      } else if (is_digit(c) || (c == '-' && depth_ == 0 && is_digit(peek(1)))) {
        out.push_back(number());
      } else if (c == '(' || c == '[') {
        ++depth_;
        out.push_back(punct());
      } else if (c == ')' || c == ']') {
        if (depth_ > 0) --depth_;
        out.push_back(punct());
      } else if (c == '-' || c == '+' || c == ',' || c == ':') {
        out.push_back(punct());
      } else {
        throw LexError(here(), describe_char(c));
      }
    }
    return out;
  }

 private:
  char peek(std::size_t ahead = 0) const {
    return pos_ + ahead < src_.size() ? src_[pos_ + ahead] : '\0';
  }

  SourceLoc here() const { return {line_, col_}; }

  void advance() {
    if (src_[pos_] == '\n') {
      ++line_;
      col_ = 1;
    } else {
      ++col_;
    }
    ++pos_;
  }

  Token make(TokenKind kind, std::size_t begin, SourceLoc loc) const {
    return Token{kind, std::string(src_.substr(begin, pos_ - begin)), loc.line, loc.col};
  }

  Token punct() {
    const auto loc = here();
    const auto b = pos_;
    advance();
    return make(TokenKind::Punct, b, loc);
  }

  Token ident() {
    const auto loc = here();
    const auto b = pos_;
    while (pos_ < src_.size()) {
      const char c = src_[pos_];
      // '-' joins words (cyclone-path, north-east) only when a letter follows.
      if (is_ident_char(c) || (c == '-' && is_alpha(peek(1)))) {
        advance();
      } else {
        break;
      }
    }
    Token t = make(TokenKind::Ident, b, loc);
    if (is_keyword(t.text)) t.kind = TokenKind::Keyword;
    return t;
  }

  void digits() {
    while (is_digit(peek())) advance();
  }

  // Reads [-]digits[.digits]; returns true when a fraction was present.
  bool decimal() {
    if (peek() == '-') advance();
    digits();
    if (peek() == '.' && is_digit(peek(1))) {
      advance();
      digits();
      return true;
    }
    return false;
  }

  Token number() {
    const auto loc = here();
    const auto b = pos_;
    const bool negative = peek() == '-';
    const std::size_t int_begin = pos_ + (negative ? 1 : 0);
    const bool fraction = decimal();

    if (fraction && !negative && peek() == '.' && is_digit(peek(1))) {
      // dd.mm.yyyy
      advance();
      const auto yb = pos_;
      digits();
      const auto dot1 = src_.find('.', int_begin);
      const auto dot2 = src_.find('.', dot1 + 1);
      const auto dlen = dot1 - int_begin, mlen = dot2 - dot1 - 1, ylen = pos_ - yb;
      if (dlen < 1 || dlen > 2 || mlen < 1 || mlen > 2 || ylen != 4)
        throw LexError(loc, "malformed date '" + std::string(src_.substr(b, pos_ - b)) + "'");
      reject_trailing_ident();
      return make(TokenKind::Date, b, loc);
    }

    if (!fraction && !negative && (peek() == 'h' || peek() == 'd') && !is_ident_char(peek(1)) &&
        peek(1) != '-') {
      advance();
      return make(TokenKind::Duration, b, loc);
    }

    reject_trailing_ident();

    if (depth_ == 0 && peek() == ',' &&
        (is_digit(peek(1)) || (peek(1) == '-' && is_digit(peek(2))))) {
      advance();
      decimal();
      reject_trailing_ident();
      return make(TokenKind::CoordPair, b, loc);
    }
    return make(TokenKind::Number, b, loc);
  }

  void reject_trailing_ident() {
    const char c = peek();
    if (is_ident_char(c) || c == '.') {
      if (c == 'h' || c == 'd')
        throw LexError(here(), "duration unit must follow an integer and end the token");
      throw LexError(here(), describe_char(c) + " after number");
    }
  }

  static std::string describe_char(char c) {
    const auto u = static_cast<unsigned char>(c);
    if (u >= 0x20 && u < 0x7f) return std::string("unexpected character '") + c + "'";
    static constexpr char hex[] = "0123456789abcdef";
    return std::string("unexpected byte 0x") + hex[u >> 4] + hex[u & 0xf];
  }

  std::string_view src_;
  std::size_t pos_ = 0;
  int line_ = 1;
  int col_ = 1;
  int depth_ = 0;  // bracket nesting; coordinate pairs only exist at depth 0
};

}  // namespace detail

/// Splits a script into tokens. `#` starts a comment that runs to the end of
/// the line. Inside `(...)` and `[...]` a comma is always punctuation, so
/// `level[440,414]` yields two numbers; at top level `48.3,-24.7` is one
/// coordinate pair.
inline std::vector<Token> tokenize(std::string_view script) { return detail::Lexer(script).run(); }

}  // namespace dslake::query
