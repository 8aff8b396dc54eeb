#pragma once

#include "betabern/term.hpp"

#include <cctype>
#include <sstream>
#include <string>
#include <string_view>

namespace bb {

class ParseError : public Error {
 public:
  enum class Kind { lexical, syntax, unknown_identifier, arity_mismatch, zero_hyperparameter, zero_ratio };

  ParseError(Kind kind, std::size_t offset, const std::string& message)
      : Error("at offset " + std::to_string(offset) + ": " + message), kind_(kind), offset_(offset) {}

  Kind kind() const { return kind_; }
  std::size_t offset() const { return offset_; }

 private:
  Kind kind_;
  std::size_t offset_;
};

inline const char* to_string(ParseError::Kind k) {
  switch (k) {
    case ParseError::Kind::lexical: return "lexical error";
    case ParseError::Kind::syntax: return "syntax error";
    case ParseError::Kind::unknown_identifier: return "unknown identifier";
    case ParseError::Kind::arity_mismatch: return "arity mismatch";
    case ParseError::Kind::zero_hyperparameter: return "zero hyperparameter";
    case ParseError::Kind::zero_ratio: return "zero ratio";
  }
  return "error";
}

namespace detail {

class Lexer {
 public:
  explicit Lexer(std::string_view src) : src_(src) {}

  void skip_ws() {
    while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) ++pos_;
  }
  std::size_t pos() {
    skip_ws();
    return pos_;
  }
  bool at_end() { return pos() == src_.size(); }
  char peek() { return at_end() ? '\0' : src_[pos_]; }

  bool accept(std::string_view tok) {
    skip_ws();
    if (src_.substr(pos_, tok.size()) != tok) return false;
    pos_ += tok.size();
    return true;
  }

  void expect(std::string_view tok) {
    std::size_t at = pos();
    if (!accept(tok)) {
      if (at < src_.size() && !is_token_char(src_[at]))
        throw ParseError(ParseError::Kind::lexical, at, std::string("unexpected character '") + src_[at] + "'");
      throw ParseError(ParseError::Kind::syntax, at, "expected '" + std::string(tok) + "'");
    }
  }

  std::string ident() {
    std::size_t at = pos();
    if (at >= src_.size() || !std::isalpha(static_cast<unsigned char>(src_[at]))) {
      if (at < src_.size() && !is_token_char(src_[at]))
        throw ParseError(ParseError::Kind::lexical, at, std::string("unexpected character '") + src_[at] + "'");
      throw ParseError(ParseError::Kind::syntax, at, "expected identifier");
    }
    std::size_t end = at;
    while (end < src_.size() &&
           (std::isalnum(static_cast<unsigned char>(src_[end])) || src_[end] == '_'))
      ++end;
    pos_ = end;
    return std::string(src_.substr(at, end - at));
  }

  BigInt nat() {
    std::size_t at = pos();
    std::size_t end = at;
    while (end < src_.size() && std::isdigit(static_cast<unsigned char>(src_[end]))) ++end;
    if (end == at) throw ParseError(ParseError::Kind::syntax, at, "expected natural number");
    pos_ = end;
    return parse_bigint(src_.substr(at, end - at));
  }

  /// True when the next token is an identifier immediately followed by `[`.
  bool keyword_bracket(std::string_view kw) {
    std::size_t at = pos();
    if (src_.substr(at, kw.size()) != kw) return false;
    std::size_t k = at + kw.size();
    while (k < src_.size() && std::isspace(static_cast<unsigned char>(src_[k]))) ++k;
    return k < src_.size() && src_[k] == '[';
  }

 private:
  static bool is_token_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '(' || c == ')' || c == '[' ||
           c == ']' || c == ',' || c == '.' || c == ':' || c == ';';
  }

  std::string_view src_;
  std::size_t pos_ = 0;
};

class TermParser {
 public:
  TermParser(std::string_view src, const Context& ctx) : lex_(src), ctx_(ctx) {
    scope_.assign(ctx.params.begin(), ctx.params.end());
  }

  Term parse_all() {
    Term t = term();
    if (!lex_.at_end()) throw ParseError(ParseError::Kind::syntax, lex_.pos(), "trailing input");
    return t;
  }

 private:
  bool in_scope(const std::string& p) const { return std::find(scope_.begin(), scope_.end(), p) != scope_.end(); }

  std::string param_ref() {
    std::size_t at = lex_.pos();
    std::string p = lex_.ident();
    if (!in_scope(p)) throw ParseError(ParseError::Kind::unknown_identifier, at, "parameter '" + p + "' is not in scope");
    return p;
  }

  Term term() {
    std::size_t at = lex_.pos();
    if (lex_.accept("(")) {
      Term t = term();
      lex_.expect(")");
      return t;
    }
    if (lex_.keyword_bracket("rch")) {
      lex_.expect("rch");
      lex_.expect("[");
      BigInt i = lex_.nat();
      lex_.expect(",");
      BigInt j = lex_.nat();
      lex_.expect("]");
      if (i + j == 0) throw ParseError(ParseError::Kind::zero_ratio, at, "ratio choice needs i+j > 0");
      auto [l, r] = pair();
      return Term::ratio(std::move(i), std::move(j), std::move(l), std::move(r));
    }
    if (lex_.keyword_bracket("pch")) {
      lex_.expect("pch");
      lex_.expect("[");
      std::string p = param_ref();
      lex_.expect("]");
      auto [l, r] = pair();
      return Term::choice(std::move(p), std::move(l), std::move(r));
    }
    if (lex_.keyword_bracket("nu")) {
      lex_.expect("nu");
      lex_.expect("[");
      BigInt i = lex_.nat();
      lex_.expect(",");
      BigInt j = lex_.nat();
      lex_.expect("]");
      if (i == 0 || j == 0)
        throw ParseError(ParseError::Kind::zero_hyperparameter, at,
                         "binder nu[" + i.str() + "," + j.str() + "] needs positive hyperparameters");
      std::string p = lex_.ident();
      lex_.expect(".");
      scope_.push_back(p);
      Term body = term();
      scope_.pop_back();
      return Term::nu(std::move(i), std::move(j), std::move(p), std::move(body));
    }
    std::string x = lex_.ident();
    std::vector<std::string> args;
    if (lex_.accept("(")) {
      if (!lex_.accept(")")) {
        do args.push_back(param_ref());
        while (lex_.accept(","));
        lex_.expect(")");
      }
    }
    const VarDecl* v = ctx_.find_var(x);
    if (!v) throw ParseError(ParseError::Kind::unknown_identifier, at, "unknown variable '" + x + "'");
    if (v->arity != args.size())
      throw ParseError(ParseError::Kind::arity_mismatch, at,
                       "variable '" + x + "' expects " + std::to_string(v->arity) + " parameter(s), got " +
                           std::to_string(args.size()));
    return Term::app(std::move(x), std::move(args));
  }

  std::pair<Term, Term> pair() {
    lex_.expect("(");
    Term l = term();
    lex_.expect(",");
    Term r = term();
    lex_.expect(")");
    return {std::move(l), std::move(r)};
  }

  Lexer lex_;
  const Context& ctx_;
  std::vector<std::string> scope_;
};

}  // namespace detail

/// Parses a term in `ctx`; rejects ill-formed input with an offset-annotated ParseError.
inline Term parse_term(std::string_view src, const Context& ctx) { return detail::TermParser(src, ctx).parse_all(); }

inline void print_term(std::ostream& os, const Term& t) {
  switch (t.kind()) {
    case Kind::var_app:
      os << t.name();
      if (!t.args().empty()) {
        os << '(';
        for (std::size_t k = 0; k < t.args().size(); ++k) os << (k ? "," : "") << t.args()[k];
        os << ')';
      }
      return;
    case Kind::ratio:
      os << "rch[" << t.i() << ',' << t.j() << "](";
      break;
    case Kind::param_choice:
      os << "pch[" << t.name() << "](";
      break;
    case Kind::nu:
      os << "nu[" << t.i() << ',' << t.j() << ']' << t.name() << '.';
      print_term(os, t.body());
      return;
  }
  print_term(os, t.left());
  os << ',';
  print_term(os, t.right());
  os << ')';
}

inline std::string print(const Term& t) {
  std::ostringstream os;
  print_term(os, t);
  return os.str();
}

/// Parses "params: p, q ; vars: x:2, y:0".  Either section may be omitted; a variable
/// without ":n" has arity 0.
inline Context parse_context(std::string_view src) {
  Context ctx;
  detail::Lexer lex(src);
  bool seen_params = false, seen_vars = false;
  while (!lex.at_end()) {
    std::size_t at = lex.pos();
    std::string section = lex.ident();
    lex.expect(":");
    if (section == "params" && !seen_params) {
      seen_params = true;
      if (lex.peek() != ';' && !lex.at_end()) {
        do ctx.params.push_back(lex.ident());
        while (lex.accept(","));
      }
    } else if (section == "vars" && !seen_vars) {
      seen_vars = true;
      if (lex.peek() != ';' && !lex.at_end()) {
        do {
          VarDecl v{lex.ident(), 0};
          if (lex.accept(":")) v.arity = to_size(lex.nat(), "arity");
          ctx.vars.push_back(std::move(v));
        } while (lex.accept(","));
      }
    } else {
      throw ParseError(ParseError::Kind::syntax, at, "expected 'params:' or 'vars:' section, got '" + section + "'");
    }
    if (!lex.accept(";") && !lex.at_end()) throw ParseError(ParseError::Kind::syntax, lex.pos(), "expected ';'");
  }
  auto problems = ctx.problems();
  if (!problems.empty()) throw ParseError(ParseError::Kind::syntax, 0, problems.front());
  return ctx;
}

inline std::string print(const Context& ctx) {
  std::string s = "params: ";
  for (std::size_t k = 0; k < ctx.params.size(); ++k) s += (k ? ", " : "") + ctx.params[k];
  s += " ; vars: ";
  for (std::size_t k = 0; k < ctx.vars.size(); ++k)
    s += (k ? ", " : "") + ctx.vars[k].name + ":" + std::to_string(ctx.vars[k].arity);
  return s;
}

}  // namespace bb
