#pragma once

#include "betabern/numeric.hpp"

#include <algorithm>
#include <cstddef>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

namespace bb {

// ---------------------------------------------------------------------------
// Contexts
// ---------------------------------------------------------------------------

struct VarDecl {
  std::string name;
  std::size_t arity = 0;

  friend bool operator==(const VarDecl&, const VarDecl&) = default;
};

/// Two-zone context: the parameter list fixes the axis order of every multi-index downstream.
struct Context {
  std::vector<std::string> params;
  std::vector<VarDecl> vars;

  std::optional<std::size_t> param_index(const std::string& name) const {
    auto it = std::find(params.begin(), params.end(), name);
    if (it == params.end()) return std::nullopt;
    return static_cast<std::size_t>(it - params.begin());
  }

  const VarDecl* find_var(const std::string& name) const {
    for (const auto& v : vars)
      if (v.name == name) return &v;
    return nullptr;
  }

  std::optional<std::size_t> var_index(const std::string& name) const {
    for (std::size_t i = 0; i < vars.size(); ++i)
      if (vars[i].name == name) return i;
    return std::nullopt;
  }

  std::size_t max_arity() const {
    std::size_t m = 0;
    for (const auto& v : vars) m = std::max(m, v.arity);
    return m;
  }

  /// Empty when the context is valid; otherwise one message per problem.
  std::vector<std::string> problems() const;

  friend bool operator==(const Context&, const Context&) = default;
};

inline bool is_identifier(const std::string& s) {
  if (s.empty()) return false;
  auto alpha = [](char c) { return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z'); };
  if (!alpha(s[0])) return false;
  return std::all_of(s.begin() + 1, s.end(), [&](char c) { return alpha(c) || (c >= '0' && c <= '9') || c == '_'; });
}

inline std::vector<std::string> Context::problems() const {
  std::vector<std::string> out;
  std::set<std::string> seen;
  auto note = [&](const std::string& n) {
    if (!is_identifier(n)) out.push_back("'" + n + "' is not an identifier");
    if (!seen.insert(n).second) out.push_back("duplicate name '" + n + "' in context");
  };
  for (const auto& p : params) note(p);
  for (const auto& v : vars) note(v.name);
  return out;
}

// ---------------------------------------------------------------------------
// Terms
// ---------------------------------------------------------------------------

enum class Kind { var_app, ratio, param_choice, nu };

class Term;

namespace detail {
struct Node;
}

/// Immutable handle to a term tree.  Subterms may be shared, so a term is in general a DAG;
/// every operation treats it as the tree it denotes.
class Term {
 public:
  Term() = default;

  static Term app(std::string var, std::vector<std::string> args = {});
  static Term ratio(BigInt i, BigInt j, Term left, Term right);
  static Term choice(std::string param, Term left, Term right);
  static Term nu(BigInt i, BigInt j, std::string bound, Term body);

  Kind kind() const;
  bool is(Kind k) const { return kind() == k; }

  /// Variable of an application, parameter of a choice, or bound parameter of a binder.
  const std::string& name() const;
  const std::vector<std::string>& args() const;
  /// Left weight of a ratio choice, or first hyperparameter of a binder.
  const BigInt& i() const;
  const BigInt& j() const;
  const Term& left() const;
  const Term& right() const;
  const Term& body() const;

  /// Parameters occurring free, sorted.
  const std::vector<std::string>& free_params() const;
  bool has_free(const std::string& p) const {
    const auto& f = free_params();
    return std::binary_search(f.begin(), f.end(), p);
  }
  /// Node count of the denoted tree (saturating).
  std::size_t size() const;
  bool contains_nu() const;

  const void* id() const { return node_.get(); }
  explicit operator bool() const { return static_cast<bool>(node_); }
  bool same_node(const Term& o) const { return node_ == o.node_; }

 private:
  explicit Term(std::shared_ptr<const detail::Node> n) : node_(std::move(n)) {}
  std::shared_ptr<const detail::Node> node_;
};

namespace detail {
struct Node {
  Kind kind = Kind::var_app;
  std::string name;
  std::vector<std::string> args;
  BigInt i, j;
  Term left, right;
  std::vector<std::string> free;
  std::size_t size = 1;
  bool has_nu = false;
};

inline std::vector<std::string> merge_sorted(const std::vector<std::string>& a, const std::vector<std::string>& b) {
  std::vector<std::string> out;
  out.reserve(a.size() + b.size());
  std::set_union(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

inline std::size_t sat_add(std::size_t a, std::size_t b) {
  std::size_t s = a + b;
  return s < a ? static_cast<std::size_t>(-1) : s;
}
}  // namespace detail

inline Term Term::app(std::string var, std::vector<std::string> args) {
  auto n = std::make_shared<detail::Node>();
  n->kind = Kind::var_app;
  n->name = std::move(var);
  n->free = args;
  std::sort(n->free.begin(), n->free.end());
  n->free.erase(std::unique(n->free.begin(), n->free.end()), n->free.end());
  n->args = std::move(args);
  return Term(std::move(n));
}

inline Term Term::ratio(BigInt i, BigInt j, Term left, Term right) {
  auto n = std::make_shared<detail::Node>();
  n->kind = Kind::ratio;
  n->i = std::move(i);
  n->j = std::move(j);
  n->free = detail::merge_sorted(left.free_params(), right.free_params());
  n->size = detail::sat_add(1, detail::sat_add(left.size(), right.size()));
  n->has_nu = left.contains_nu() || right.contains_nu();
  n->left = std::move(left);
  n->right = std::move(right);
  return Term(std::move(n));
}

inline Term Term::choice(std::string param, Term left, Term right) {
  auto n = std::make_shared<detail::Node>();
  n->kind = Kind::param_choice;
  n->free = detail::merge_sorted(left.free_params(), right.free_params());
  n->free = detail::merge_sorted(n->free, {param});
  n->name = std::move(param);
  n->size = detail::sat_add(1, detail::sat_add(left.size(), right.size()));
  n->has_nu = left.contains_nu() || right.contains_nu();
  n->left = std::move(left);
  n->right = std::move(right);
  return Term(std::move(n));
}

inline Term Term::nu(BigInt i, BigInt j, std::string bound, Term body) {
  auto n = std::make_shared<detail::Node>();
  n->kind = Kind::nu;
  n->i = std::move(i);
  n->j = std::move(j);
  n->free = body.free_params();
  n->free.erase(std::remove(n->free.begin(), n->free.end(), bound), n->free.end());
  n->name = std::move(bound);
  n->size = detail::sat_add(1, body.size());
  n->has_nu = true;
  n->left = std::move(body);
  return Term(std::move(n));
}

inline Kind Term::kind() const { return node_->kind; }
inline const std::string& Term::name() const { return node_->name; }
inline const std::vector<std::string>& Term::args() const { return node_->args; }
inline const BigInt& Term::i() const { return node_->i; }
inline const BigInt& Term::j() const { return node_->j; }
inline const Term& Term::left() const { return node_->left; }
inline const Term& Term::right() const { return node_->right; }
inline const Term& Term::body() const { return node_->left; }
inline const std::vector<std::string>& Term::free_params() const { return node_->free; }
inline std::size_t Term::size() const { return node_->size; }
inline bool Term::contains_nu() const { return node_->has_nu; }

// ---------------------------------------------------------------------------
// Paths
// ---------------------------------------------------------------------------

enum class Branch { left, right, body };
using Path = std::vector<Branch>;

inline std::string to_string(const Path& path) {
  if (path.empty()) return ".";
  std::string s;
  for (std::size_t k = 0; k < path.size(); ++k) {
    if (k) s += '.';
    s += path[k] == Branch::left ? 'l' : path[k] == Branch::right ? 'r' : 'b';
  }
  return s;
}

inline Path parse_path(const std::string& text) {
  Path p;
  if (text.empty() || text == "." || text == "root") return p;
  for (std::size_t k = 0; k < text.size(); ++k) {
    char c = text[k];
    if (c == '.') continue;
    if (c == 'l') p.push_back(Branch::left);
    else if (c == 'r') p.push_back(Branch::right);
    else if (c == 'b') p.push_back(Branch::body);
    else throw Error("bad path selector '" + std::string(1, c) + "' in '" + text + "'");
  }
  return p;
}

inline const Term& subterm_at(const Term& t, const Path& path) {
  const Term* cur = &t;
  for (std::size_t k = 0; k < path.size(); ++k) {
    Branch b = path[k];
    bool ok = (b == Branch::body) ? cur->is(Kind::nu) : (cur->is(Kind::ratio) || cur->is(Kind::param_choice));
    if (!ok)
      throw Error("path " + to_string(path) + " does not exist (selector " + std::to_string(k + 1) + ")");
    cur = b == Branch::left ? &cur->left() : b == Branch::right ? &cur->right() : &cur->body();
  }
  return *cur;
}

inline Term rebuild_with(const Term& t, Branch b, Term child) {
  switch (t.kind()) {
    case Kind::ratio:
      return b == Branch::left ? Term::ratio(t.i(), t.j(), std::move(child), t.right())
                               : Term::ratio(t.i(), t.j(), t.left(), std::move(child));
    case Kind::param_choice:
      return b == Branch::left ? Term::choice(t.name(), std::move(child), t.right())
                               : Term::choice(t.name(), t.left(), std::move(child));
    case Kind::nu:
      return Term::nu(t.i(), t.j(), t.name(), std::move(child));
    case Kind::var_app:
      break;
  }
  throw Error("cannot descend into a variable application");
}

inline Term replace_at(const Term& t, const Path& path, std::size_t from, Term replacement) {
  if (from == path.size()) return replacement;
  const Term& child = subterm_at(t, Path{path[from]});
  return rebuild_with(t, path[from], replace_at(child, path, from + 1, std::move(replacement)));
}

inline Term replace_at(const Term& t, const Path& path, Term replacement) {
  return replace_at(t, path, 0, std::move(replacement));
}

/// Parameters bound by the binders passed on the way down `path`, outermost first.
inline std::vector<std::string> binders_along(const Term& t, const Path& path) {
  std::vector<std::string> out;
  const Term* cur = &t;
  for (Branch b : path) {
    if (cur->is(Kind::nu)) out.push_back(cur->name());
    cur = &subterm_at(*cur, Path{b});
  }
  return out;
}

// ---------------------------------------------------------------------------
// Well-formedness
// ---------------------------------------------------------------------------

struct Violation {
  Path path;
  std::string message;
};

inline std::vector<Violation> check_wellformed(const Context& ctx, const Term& t) {
  std::vector<Violation> out;
  for (const auto& p : ctx.problems()) out.push_back({{}, p});
  std::vector<std::string> scope(ctx.params.begin(), ctx.params.end());
  Path path;
  auto in_scope = [&](const std::string& p) { return std::find(scope.begin(), scope.end(), p) != scope.end(); };
  std::function<void(const Term&)> go = [&](const Term& u) {
    switch (u.kind()) {
      case Kind::var_app: {
        const VarDecl* v = ctx.find_var(u.name());
        if (!v) {
          out.push_back({path, "unknown variable '" + u.name() + "'"});
        } else if (v->arity != u.args().size()) {
          out.push_back({path, "variable '" + u.name() + "' expects " + std::to_string(v->arity) +
                                   " parameter(s), got " + std::to_string(u.args().size())});
        }
        for (const auto& a : u.args())
          if (!in_scope(a)) out.push_back({path, "parameter '" + a + "' is not in scope"});
        return;
      }
      case Kind::ratio:
        if (u.i() < 0 || u.j() < 0) out.push_back({path, "negative ratio weight"});
        else if (u.i() + u.j() == 0) out.push_back({path, "ratio choice needs i+j > 0"});
        break;
      case Kind::param_choice:
        if (!in_scope(u.name())) out.push_back({path, "parameter '" + u.name() + "' is not in scope"});
        break;
      case Kind::nu:
        if (u.i() < 1) out.push_back({path, "binder hyperparameter i=" + u.i().str() + " must be positive"});
        if (u.j() < 1) out.push_back({path, "binder hyperparameter j=" + u.j().str() + " must be positive"});
        if (!is_identifier(u.name())) out.push_back({path, "'" + u.name() + "' is not an identifier"});
        scope.push_back(u.name());
        path.push_back(Branch::body);
        go(u.body());
        path.pop_back();
        scope.pop_back();
        return;
    }
    path.push_back(Branch::left);
    go(u.left());
    path.back() = Branch::right;
    go(u.right());
    path.pop_back();
  };
  go(t);
  return out;
}

// ---------------------------------------------------------------------------
// Names, renaming, alpha-equivalence
// ---------------------------------------------------------------------------

/// `base` itself if unused, otherwise its stem with the smallest numeric suffix not in `avoid`.
inline std::string fresh_name(const std::string& base, const std::set<std::string>& avoid) {
  if (!avoid.count(base)) return base;
  std::string stem = base;
  while (stem.size() > 1 && stem.back() >= '0' && stem.back() <= '9') stem.pop_back();
  for (std::size_t n = 1;; ++n) {
    std::string c = stem + std::to_string(n);
    if (!avoid.count(c)) return c;
  }
}

inline void collect_names(const Term& t, std::set<std::string>& out) {
  switch (t.kind()) {
    case Kind::var_app:
      out.insert(t.args().begin(), t.args().end());
      return;
    case Kind::param_choice:
      out.insert(t.name());
      [[fallthrough]];
    case Kind::ratio:
      collect_names(t.left(), out);
      collect_names(t.right(), out);
      return;
    case Kind::nu:
      out.insert(t.name());
      collect_names(t.body(), out);
      return;
  }
}

/// Simultaneous capture-avoiding renaming of free parameters.
inline Term rename_params(const Term& t, const std::map<std::string, std::string>& sigma) {
  std::map<std::string, std::string> live;
  for (const auto& [from, to] : sigma)
    if (from != to && t.has_free(from)) live.emplace(from, to);
  if (live.empty()) return t;
  auto map_name = [&](const std::string& p) {
    auto it = live.find(p);
    return it == live.end() ? p : it->second;
  };
  switch (t.kind()) {
    case Kind::var_app: {
      std::vector<std::string> args;
      for (const auto& a : t.args()) args.push_back(map_name(a));
      return Term::app(t.name(), std::move(args));
    }
    case Kind::ratio:
      return Term::ratio(t.i(), t.j(), rename_params(t.left(), live), rename_params(t.right(), live));
    case Kind::param_choice:
      return Term::choice(map_name(t.name()), rename_params(t.left(), live), rename_params(t.right(), live));
    case Kind::nu: {
      auto inner = live;
      inner.erase(t.name());
      std::set<std::string> targets;
      for (const auto& [from, to] : inner)
        if (t.body().has_free(from)) targets.insert(to);
      if (!targets.count(t.name())) return Term::nu(t.i(), t.j(), t.name(), rename_params(t.body(), inner));
      // The binder would capture a renamed parameter: rename it first.
      std::set<std::string> avoid = targets;
      collect_names(t.body(), avoid);
      for (const auto& [from, to] : inner) avoid.insert(from);
      std::string b = fresh_name(t.name(), avoid);
      inner[t.name()] = b;
      return Term::nu(t.i(), t.j(), b, rename_params(t.body(), inner));
    }
  }
  return t;
}

/// True iff the terms differ only in the names of bound parameters.
inline bool alpha_eq(const Term& t, const Term& u) {
  // Bound names map to binder depth; free names compare by spelling.
  std::vector<std::string> lt, lu;
  std::function<bool(const Term&, const Term&)> go = [&](const Term& a, const Term& b) -> bool {
    if (a.same_node(b) && lt == lu) return true;
    if (a.kind() != b.kind()) return false;
    auto resolve = [](const std::vector<std::string>& env, const std::string& n) -> std::pair<long, std::string> {
      for (std::size_t k = env.size(); k-- > 0;)
        if (env[k] == n) return {static_cast<long>(k), {}};
      return {-1, n};
    };
    auto same = [&](const std::string& x, const std::string& y) { return resolve(lt, x) == resolve(lu, y); };
    switch (a.kind()) {
      case Kind::var_app:
        if (a.name() != b.name() || a.args().size() != b.args().size()) return false;
        for (std::size_t k = 0; k < a.args().size(); ++k)
          if (!same(a.args()[k], b.args()[k])) return false;
        return true;
      case Kind::ratio:
        return a.i() == b.i() && a.j() == b.j() && go(a.left(), b.left()) && go(a.right(), b.right());
      case Kind::param_choice:
        return same(a.name(), b.name()) && go(a.left(), b.left()) && go(a.right(), b.right());
      case Kind::nu: {
        if (a.i() != b.i() || a.j() != b.j()) return false;
        lt.push_back(a.name());
        lu.push_back(b.name());
        bool r = go(a.body(), b.body());
        lt.pop_back();
        lu.pop_back();
        return r;
      }
    }
    return false;
  };
  return go(t, u);
}

// ---------------------------------------------------------------------------
// Substitution of terms for variables
// ---------------------------------------------------------------------------

struct Replacement {
  std::vector<std::string> formals;
  Term term;
};

using Bindings = std::map<std::string, Replacement>;

/// Simultaneous substitution.  Each occurrence x(q1..qm) of a bound variable becomes the
/// replacement with its formal parameters renamed to q1..qm; binders of `t` are renamed
/// whenever they would capture a free parameter of a replacement.
inline Term substitute(const Term& t, const Bindings& bindings) {
  std::set<std::string> repl_free;  // free parameters of replacements other than formals
  std::set<std::string> avoid;
  collect_names(t, avoid);
  for (const auto& [var, r] : bindings) {
    std::set<std::string> formals(r.formals.begin(), r.formals.end());
    if (formals.size() != r.formals.size()) throw Error("duplicate formal parameter for '" + var + "'");
    for (const auto& p : r.term.free_params())
      if (!formals.count(p)) repl_free.insert(p);
    collect_names(r.term, avoid);
  }
  std::function<Term(const Term&, const std::map<std::string, std::string>&)> go =
      [&](const Term& u, const std::map<std::string, std::string>& rho) -> Term {
    auto map_name = [&](const std::string& p) {
      auto it = rho.find(p);
      return it == rho.end() ? p : it->second;
    };
    switch (u.kind()) {
      case Kind::var_app: {
        std::vector<std::string> args;
        for (const auto& a : u.args()) args.push_back(map_name(a));
        auto it = bindings.find(u.name());
        if (it == bindings.end()) return Term::app(u.name(), std::move(args));
        const Replacement& r = it->second;
        if (r.formals.size() != args.size())
          throw Error("arity mismatch substituting '" + u.name() + "': " + std::to_string(args.size()) +
                      " argument(s) for " + std::to_string(r.formals.size()) + " formal(s)");
        std::map<std::string, std::string> sigma;
        for (std::size_t k = 0; k < args.size(); ++k) sigma[r.formals[k]] = args[k];
        return rename_params(r.term, sigma);
      }
      case Kind::ratio:
        return Term::ratio(u.i(), u.j(), go(u.left(), rho), go(u.right(), rho));
      case Kind::param_choice:
        return Term::choice(map_name(u.name()), go(u.left(), rho), go(u.right(), rho));
      case Kind::nu: {
        auto inner = rho;
        std::string b = u.name();
        if (repl_free.count(b)) {
          std::set<std::string> block = avoid;
          block.insert(repl_free.begin(), repl_free.end());
          for (const auto& [from, to] : rho) block.insert(to);
          b = fresh_name(u.name(), block);
          avoid.insert(b);
        }
        if (b == u.name()) inner.erase(b);
        else inner[u.name()] = b;
        return Term::nu(u.i(), u.j(), b, go(u.body(), inner));
      }
    }
    return u;
  };
  return go(t, {});
}

}  // namespace bb
