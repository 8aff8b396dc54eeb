#pragma once

#include "betabern/semantics.hpp"

#include <cctype>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace bb {

namespace detail {

// Recursive descent over  expr := term (('+'|'-') term)* ; term := unary (('*'|'/') unary)* ;
// unary := '-' unary | power ; power := atom ('^' NAT)? ; atom := NAT | formal | '(' expr ')'.
class PolyParser {
 public:
  PolyParser(std::string_view src, std::size_t pos, std::vector<std::string> formals)
      : src_(src), pos_(pos), formals_(std::move(formals)) {}

  Poly parse_all() {
    Poly p = expr();
    skip();
    if (pos_ != src_.size()) fail("unexpected '" + std::string(1, src_[pos_]) + "'");
    return p;
  }

 private:
  [[noreturn]] void fail(const std::string& msg) const { throw ParseError(ParseError::Kind::syntax, pos_, msg); }

  void skip() {
    while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) ++pos_;
  }
  bool accept(char c) {
    skip();
    if (pos_ < src_.size() && src_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  std::size_t n() const { return formals_.size(); }

  Poly expr() {
    Poly acc = term();
    for (;;) {
      if (accept('+')) acc += term();
      else if (accept('-')) acc -= term();
      else return acc;
    }
  }

  Poly term() {
    Poly acc = unary();
    for (;;) {
      if (accept('*')) {
        acc = acc * unary();
      } else if (accept('/')) {
        std::size_t at = pos_;
        Poly d = unary();
        bool constant = d.term_count() == 1 && std::all_of(d.exponents(0), d.exponents(0) + n(), [](auto e) { return e == 0; });
        if (!constant) throw ParseError(ParseError::Kind::syntax, at, "can only divide by a nonzero constant");
        acc *= Rat(1) / d.coeff(0);
      } else {
        return acc;
      }
    }
  }

  Poly unary() {
    if (accept('-')) return unary() * Rat(-1);
    if (accept('+')) return unary();
    return power();
  }

  Poly power() {
    Poly base = atom();
    if (!accept('^')) return base;
    skip();
    std::size_t e = to_size(nat(), "exponent");
    Poly out = Poly::constant(n(), 1);
    for (std::size_t k = 0; k < e; ++k) out = out * base;
    return out;
  }

  BigInt nat() {
    skip();
    std::size_t start = pos_;
    while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) ++pos_;
    if (start == pos_) fail("expected a number");
    return parse_bigint(std::string(src_.substr(start, pos_ - start)));
  }

  Poly atom() {
    skip();
    if (accept('(')) {
      Poly p = expr();
      if (!accept(')')) fail("expected ')'");
      return p;
    }
    if (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) return Poly::constant(n(), Rat(nat()));
    std::size_t start = pos_;
    while (pos_ < src_.size() && (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_')) ++pos_;
    if (start == pos_) fail(pos_ < src_.size() ? "unexpected '" + std::string(1, src_[pos_]) + "'" : "unexpected end of input");
    std::string name(src_.substr(start, pos_ - start));
    for (std::size_t k = 0; k < n(); ++k)
      if (formals_[k] == name) return Poly::variable(n(), k);
    throw ParseError(ParseError::Kind::unknown_identifier, start, "'" + name + "' is not a formal parameter");
  }

  std::string_view src_;
  std::size_t pos_;
  std::vector<std::string> formals_;
};

}  // namespace detail

/// Parses "f_x(a,b) = a*b + 1/2" (or "x(a,b) = ...", "f_y = 1") into the argument
/// polynomial for variable x, in the variable's formal parameters.
inline std::pair<std::string, Poly> parse_function_argument(std::string_view src, const Context& ctx) {
  std::size_t eq = src.find('=');
  if (eq == std::string_view::npos) throw ParseError(ParseError::Kind::syntax, 0, "expected 'f_x(...) = polynomial'");
  std::string head(src.substr(0, eq));
  std::size_t open = head.find('(');
  std::string name = head.substr(0, open);
  auto trim = [](std::string s) {
    auto b = s.find_first_not_of(" \t"), e = s.find_last_not_of(" \t");
    return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
  };
  name = trim(name);
  std::vector<std::string> formals;
  if (open != std::string::npos) {
    std::size_t close = head.find(')', open);
    if (close == std::string::npos || !trim(head.substr(close + 1)).empty())
      throw ParseError(ParseError::Kind::syntax, open, "malformed formal parameter list");
    std::string list = head.substr(open + 1, close - open - 1);
    std::size_t start = 0;
    if (!trim(list).empty()) {
      for (;;) {
        std::size_t comma = list.find(',', start);
        std::string f = trim(list.substr(start, comma == std::string::npos ? std::string::npos : comma - start));
        if (!is_identifier(f)) throw ParseError(ParseError::Kind::syntax, open + 1 + start, "bad formal parameter '" + f + "'");
        formals.push_back(f);
        if (comma == std::string::npos) break;
        start = comma + 1;
      }
    }
  }
  const VarDecl* v = ctx.find_var(name);
  if (!v && name.rfind("f_", 0) == 0) v = ctx.find_var(name.substr(2));
  if (!v) throw ParseError(ParseError::Kind::unknown_identifier, 0, "'" + name + "' does not name a context variable");
  if (formals.size() != v->arity)
    throw ParseError(ParseError::Kind::arity_mismatch, 0,
                     "'" + v->name + "' has arity " + std::to_string(v->arity) + " but " +
                         std::to_string(formals.size()) + " formal parameter(s) were given");
  return {v->name, detail::PolyParser(src, eq + 1, formals).parse_all()};
}

/// Builds a complete argument from "f_x(...) = ..." definitions; every variable needs one.
inline FuncArg parse_function_arguments(const std::vector<std::string>& defs, const Context& ctx) {
  FuncArg args;
  for (const auto& d : defs) {
    auto [name, poly] = parse_function_argument(d, ctx);
    if (!args.functions.emplace(name, std::move(poly)).second) throw Error("variable '" + name + "' is defined twice");
  }
  for (const auto& v : ctx.vars)
    if (!args.functions.count(v.name)) throw Error("no argument given for variable '" + v.name + "'");
  return args;
}

}  // namespace bb
