#pragma once

#include "betabern/syntax.hpp"

#include <array>
#include <cctype>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace bb {

enum class Axiom { ConvexDistr, ConvexSymm, ConvexZero, ConvexIdem, C1, C2, C3, C4, C5, D1, D2, Conj };
enum class Direction { lr, rl };

inline constexpr std::array<Axiom, 12> all_axioms = {Axiom::ConvexDistr, Axiom::ConvexSymm, Axiom::ConvexZero,
                                                     Axiom::ConvexIdem,  Axiom::C1,         Axiom::C2,
                                                     Axiom::C3,          Axiom::C4,         Axiom::C5,
                                                     Axiom::D1,          Axiom::D2,         Axiom::Conj};

inline const char* to_string(Axiom a) {
  switch (a) {
    case Axiom::ConvexDistr: return "ConvexDistr";
    case Axiom::ConvexSymm: return "ConvexSymm";
    case Axiom::ConvexZero: return "ConvexZero";
    case Axiom::ConvexIdem: return "ConvexIdem";
    case Axiom::C1: return "C1";
    case Axiom::C2: return "C2";
    case Axiom::C3: return "C3";
    case Axiom::C4: return "C4";
    case Axiom::C5: return "C5";
    case Axiom::D1: return "D1";
    case Axiom::D2: return "D2";
    case Axiom::Conj: return "Conj";
  }
  return "?";
}

inline std::optional<Axiom> parse_axiom(const std::string& s) {
  for (Axiom a : all_axioms)
    if (s == to_string(a)) return a;
  return std::nullopt;
}

inline const char* to_string(Direction d) { return d == Direction::lr ? "LR" : "RL"; }

/// Assignment of the scheme metavariables: naturals i,j,k,l; parameters p,q; terms w,x,y,z.
struct Instantiation {
  std::optional<BigInt> i, j, k, l;
  std::optional<std::string> p, q;
  std::optional<Term> w, x, y, z;
};

struct RewriteStep {
  Axiom axiom = Axiom::ConvexSymm;
  Direction direction = Direction::lr;
  Path path;
  Instantiation inst;
};

class AxiomError : public Error {
 public:
  enum class Kind { pattern_mismatch, side_condition, missing_instantiation, instantiation_conflict };
  AxiomError(Kind kind, const std::string& msg) : Error(msg), kind_(kind) {}
  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

namespace detail {

inline AxiomError mismatch(Axiom a, Direction d, const std::string& what) {
  return AxiomError(AxiomError::Kind::pattern_mismatch,
                    std::string(to_string(a)) + " " + to_string(d) + ": pattern mismatch: " + what);
}

inline AxiomError side(Axiom a, const std::string& what) {
  return AxiomError(AxiomError::Kind::side_condition, std::string(to_string(a)) + ": side condition violated: " + what);
}

template <class T>
const T& need(const std::optional<T>& v, Axiom a, const char* name) {
  if (!v)
    throw AxiomError(AxiomError::Kind::missing_instantiation,
                     std::string(to_string(a)) + ": metavariable '" + name + "' is not instantiated");
  return *v;
}

inline Term R(const BigInt& i, const BigInt& j, Term l, Term r) { return Term::ratio(i, j, std::move(l), std::move(r)); }
inline Term P(const std::string& p, Term l, Term r) { return Term::choice(p, std::move(l), std::move(r)); }
inline Term N(const BigInt& i, const BigInt& j, const std::string& p, Term b) { return Term::nu(i, j, p, std::move(b)); }

inline void ratio_ok(Axiom a, const BigInt& i, const BigInt& j) {
  if (i < 0 || j < 0) throw side(a, "negative ratio weight");
  if (i + j == 0) throw side(a, "ratio choice with i+j = 0");
}

inline void nu_ok(Axiom a, const BigInt& i, const BigInt& j) {
  if (i < 1 || j < 1) throw side(a, "binder hyperparameters must be positive, got " + i.str() + "," + j.str());
}

/// Both sides of a scheme instance; throws on missing metavariables or side conditions.
inline std::pair<Term, Term> sides(Axiom a, const Instantiation& s) {
  auto I = [&] { return need(s.i, a, "i"); };
  auto J = [&] { return need(s.j, a, "j"); };
  auto K = [&] { return need(s.k, a, "k"); };
  auto L = [&] { return need(s.l, a, "l"); };
  auto p = [&] { return need(s.p, a, "p"); };
  auto q = [&] { return need(s.q, a, "q"); };
  auto w = [&] { return need(s.w, a, "w"); };
  auto x = [&] { return need(s.x, a, "x"); };
  auto y = [&] { return need(s.y, a, "y"); };
  auto z = [&] { return need(s.z, a, "z"); };
  switch (a) {
    case Axiom::ConvexDistr:
      ratio_ok(a, I(), J());
      ratio_ok(a, K(), L());
      ratio_ok(a, I(), K());
      ratio_ok(a, J(), L());
      return {R(I() + J(), K() + L(), R(I(), J(), w(), x()), R(K(), L(), y(), z())),
              R(I() + K(), J() + L(), R(I(), K(), w(), y()), R(J(), L(), x(), z()))};
    case Axiom::ConvexSymm:
      ratio_ok(a, I(), J());
      return {R(I(), J(), x(), y()), R(J(), I(), y(), x())};
    case Axiom::ConvexZero:
      ratio_ok(a, I(), 0);
      return {R(I(), 0, x(), y()), x()};
    case Axiom::ConvexIdem:
      ratio_ok(a, I(), J());
      return {R(I(), J(), x(), x()), x()};
    case Axiom::C1:
      return {P(p(), P(q(), w(), x()), P(q(), y(), z())), P(q(), P(p(), w(), y()), P(p(), x(), z()))};
    case Axiom::C2:
      nu_ok(a, I(), J());
      nu_ok(a, K(), L());
      if (p() == q()) throw side(a, "the two bound parameters must differ");
      return {N(I(), J(), p(), N(K(), L(), q(), x())), N(K(), L(), q(), N(I(), J(), p(), x()))};
    case Axiom::C3:
      nu_ok(a, I(), J());
      if (p() == q()) throw side(a, "the choice parameter must differ from the bound parameter");
      return {N(I(), J(), p(), P(q(), x(), y())), P(q(), N(I(), J(), p(), x()), N(I(), J(), p(), y()))};
    case Axiom::C4:
      nu_ok(a, I(), J());
      ratio_ok(a, K(), L());
      return {N(I(), J(), p(), R(K(), L(), x(), y())), R(K(), L(), N(I(), J(), p(), x()), N(I(), J(), p(), y()))};
    case Axiom::C5:
      ratio_ok(a, I(), J());
      return {P(p(), R(I(), J(), w(), x()), R(I(), J(), y(), z())), R(I(), J(), P(p(), w(), y()), P(p(), x(), z()))};
    case Axiom::D1:
      nu_ok(a, I(), J());
      if (x().has_free(p())) throw side(a, "'" + p() + "' occurs free in the body");
      return {N(I(), J(), p(), x()), x()};
    case Axiom::D2:
      return {P(p(), x(), x()), x()};
    case Axiom::Conj:
      nu_ok(a, I(), J());
      return {N(I(), J(), p(), P(p(), x(), y())), R(I(), J(), N(I() + 1, J(), p(), x()), N(I(), J() + 1, p(), y()))};
  }
  throw Error("unknown axiom");
}

/// Gives two binders (p over x, p2 over y) one common name, avoiding `avoid` and capture.
inline std::tuple<std::string, Term, Term> unify_binders(const std::string& p, const Term& x, const std::string& p2,
                                                         const Term& y, const std::optional<std::string>& avoid) {
  std::string b = p;
  bool clash = (p != p2 && y.has_free(p)) || (avoid && *avoid == b);
  if (clash) {
    std::set<std::string> names{p, p2};
    if (avoid) names.insert(*avoid);
    collect_names(x, names);
    collect_names(y, names);
    b = fresh_name(p, names);
  }
  return {b, rename_params(x, {{p, b}}), rename_params(y, {{p2, b}})};
}

inline void expect_kind(const Term& t, Kind k, Axiom a, Direction d, const char* what) {
  if (!t.is(k)) throw mismatch(a, d, std::string("expected ") + what + ", found " + print(t));
}

/// Metavariables determined by matching the source side of the scheme against `t`.
inline Instantiation match(Axiom a, Direction d, const Term& t) {
  Instantiation s;
  const bool lr = d == Direction::lr;
  auto ratio = [&](const Term& u, const char* what) { expect_kind(u, Kind::ratio, a, d, what); };
  auto choice = [&](const Term& u, const char* what) { expect_kind(u, Kind::param_choice, a, d, what); };
  auto nu = [&](const Term& u, const char* what) { expect_kind(u, Kind::nu, a, d, what); };
  switch (a) {
    case Axiom::ConvexDistr: {
      ratio(t, "a ratio choice");
      ratio(t.left(), "a ratio choice on the left");
      ratio(t.right(), "a ratio choice on the right");
      const Term &L = t.left(), &Rt = t.right();
      if (lr) {
        s.i = L.i(), s.j = L.j(), s.k = Rt.i(), s.l = Rt.j();
        s.w = L.left(), s.x = L.right(), s.y = Rt.left(), s.z = Rt.right();
        if (t.i() != *s.i + *s.j || t.j() != *s.k + *s.l)
          throw mismatch(a, d, "outer weights must be the sums of the inner weights");
      } else {
        s.i = L.i(), s.k = L.j(), s.j = Rt.i(), s.l = Rt.j();
        s.w = L.left(), s.y = L.right(), s.x = Rt.left(), s.z = Rt.right();
        if (t.i() != *s.i + *s.k || t.j() != *s.j + *s.l)
          throw mismatch(a, d, "outer weights must be the sums of the inner weights");
      }
      return s;
    }
    case Axiom::ConvexSymm:
      ratio(t, "a ratio choice");
      if (lr) s.i = t.i(), s.j = t.j(), s.x = t.left(), s.y = t.right();
      else s.j = t.i(), s.i = t.j(), s.y = t.left(), s.x = t.right();
      return s;
    case Axiom::ConvexZero:
      if (!lr) {
        s.x = t;
        return s;
      }
      ratio(t, "a ratio choice");
      if (t.j() != 0) throw mismatch(a, d, "right weight must be 0");
      s.i = t.i(), s.x = t.left(), s.y = t.right();
      return s;
    case Axiom::ConvexIdem:
      if (!lr) {
        s.x = t;
        return s;
      }
      ratio(t, "a ratio choice");
      if (!alpha_eq(t.left(), t.right())) throw mismatch(a, d, "branches differ");
      s.i = t.i(), s.j = t.j(), s.x = t.left();
      return s;
    case Axiom::C1:
      choice(t, "a parameter choice");
      choice(t.left(), "a parameter choice on the left");
      choice(t.right(), "a parameter choice on the right");
      if (t.left().name() != t.right().name()) throw mismatch(a, d, "inner choices use different parameters");
      if (lr) {
        s.p = t.name(), s.q = t.left().name();
        s.w = t.left().left(), s.x = t.left().right(), s.y = t.right().left(), s.z = t.right().right();
      } else {
        s.q = t.name(), s.p = t.left().name();
        s.w = t.left().left(), s.y = t.left().right(), s.x = t.right().left(), s.z = t.right().right();
      }
      return s;
    case Axiom::C2:
      nu(t, "a binder");
      nu(t.body(), "a nested binder");
      if (lr) s.i = t.i(), s.j = t.j(), s.p = t.name(), s.k = t.body().i(), s.l = t.body().j(), s.q = t.body().name();
      else s.k = t.i(), s.l = t.j(), s.q = t.name(), s.i = t.body().i(), s.j = t.body().j(), s.p = t.body().name();
      s.x = t.body().body();
      return s;
    case Axiom::C3:
      if (lr) {
        nu(t, "a binder");
        choice(t.body(), "a parameter choice under the binder");
        s.i = t.i(), s.j = t.j(), s.p = t.name(), s.q = t.body().name(), s.x = t.body().left(), s.y = t.body().right();
      } else {
        choice(t, "a parameter choice");
        nu(t.left(), "a binder on the left");
        nu(t.right(), "a binder on the right");
        if (t.left().i() != t.right().i() || t.left().j() != t.right().j())
          throw mismatch(a, d, "binders have different hyperparameters");
        s.i = t.left().i(), s.j = t.left().j(), s.q = t.name();
        auto [b, x, y] = unify_binders(t.left().name(), t.left().body(), t.right().name(), t.right().body(), t.name());
        s.p = b, s.x = x, s.y = y;
      }
      return s;
    case Axiom::C4:
      if (lr) {
        nu(t, "a binder");
        ratio(t.body(), "a ratio choice under the binder");
        s.i = t.i(), s.j = t.j(), s.p = t.name(), s.k = t.body().i(), s.l = t.body().j();
        s.x = t.body().left(), s.y = t.body().right();
      } else {
        ratio(t, "a ratio choice");
        nu(t.left(), "a binder on the left");
        nu(t.right(), "a binder on the right");
        if (t.left().i() != t.right().i() || t.left().j() != t.right().j())
          throw mismatch(a, d, "binders have different hyperparameters");
        s.k = t.i(), s.l = t.j(), s.i = t.left().i(), s.j = t.left().j();
        auto [b, x, y] = unify_binders(t.left().name(), t.left().body(), t.right().name(), t.right().body(), std::nullopt);
        s.p = b, s.x = x, s.y = y;
      }
      return s;
    case Axiom::C5:
      if (lr) {
        choice(t, "a parameter choice");
        ratio(t.left(), "a ratio choice on the left");
        ratio(t.right(), "a ratio choice on the right");
        if (t.left().i() != t.right().i() || t.left().j() != t.right().j())
          throw mismatch(a, d, "inner ratio choices have different weights");
        s.p = t.name(), s.i = t.left().i(), s.j = t.left().j();
        s.w = t.left().left(), s.x = t.left().right(), s.y = t.right().left(), s.z = t.right().right();
      } else {
        ratio(t, "a ratio choice");
        choice(t.left(), "a parameter choice on the left");
        choice(t.right(), "a parameter choice on the right");
        if (t.left().name() != t.right().name()) throw mismatch(a, d, "inner choices use different parameters");
        s.i = t.i(), s.j = t.j(), s.p = t.left().name();
        s.w = t.left().left(), s.y = t.left().right(), s.x = t.right().left(), s.z = t.right().right();
      }
      return s;
    case Axiom::D1:
      if (!lr) {
        s.x = t;
        return s;
      }
      nu(t, "a binder");
      s.i = t.i(), s.j = t.j(), s.p = t.name(), s.x = t.body();
      return s;
    case Axiom::D2:
      if (!lr) {
        s.x = t;
        return s;
      }
      choice(t, "a parameter choice");
      if (!alpha_eq(t.left(), t.right())) throw mismatch(a, d, "branches differ");
      s.p = t.name(), s.x = t.left();
      return s;
    case Axiom::Conj:
      if (lr) {
        nu(t, "a binder");
        choice(t.body(), "a parameter choice under the binder");
        if (t.body().name() != t.name()) throw side(a, "the choice must be on the bound parameter '" + t.name() + "'");
        s.i = t.i(), s.j = t.j(), s.p = t.name(), s.x = t.body().left(), s.y = t.body().right();
      } else {
        ratio(t, "a ratio choice");
        nu(t.left(), "a binder on the left");
        nu(t.right(), "a binder on the right");
        const Term &L = t.left(), &Rt = t.right();
        if (L.i() != t.i() + 1 || L.j() != t.j() || Rt.i() != t.i() || Rt.j() != t.j() + 1)
          throw mismatch(a, d, "binder hyperparameters must be (i+1,j) and (i,j+1) for weights (i,j)");
        s.i = t.i(), s.j = t.j();
        auto [b, x, y] = unify_binders(L.name(), L.body(), Rt.name(), Rt.body(), std::nullopt);
        s.p = b, s.x = x, s.y = y;
      }
      return s;
  }
  throw Error("unknown axiom");
}

template <class T, class Eq>
void merge_field(std::optional<T>& into, const std::optional<T>& extra, const char* name, Axiom a, Eq eq) {
  if (!extra) return;
  if (!into) {
    into = extra;
    return;
  }
  if (!eq(*into, *extra))
    throw AxiomError(AxiomError::Kind::instantiation_conflict,
                     std::string(to_string(a)) + ": supplied value for '" + name + "' contradicts the matched term");
}

inline void merge(Instantiation& s, const Instantiation& extra, Axiom a) {
  auto same = [](const auto& u, const auto& v) { return u == v; };
  auto same_term = [](const Term& u, const Term& v) { return alpha_eq(u, v); };
  merge_field(s.i, extra.i, "i", a, same);
  merge_field(s.j, extra.j, "j", a, same);
  merge_field(s.k, extra.k, "k", a, same);
  merge_field(s.l, extra.l, "l", a, same);
  merge_field(s.p, extra.p, "p", a, same);
  merge_field(s.q, extra.q, "q", a, same);
  merge_field(s.w, extra.w, "w", a, same_term);
  merge_field(s.x, extra.x, "x", a, same_term);
  merge_field(s.y, extra.y, "y", a, same_term);
  merge_field(s.z, extra.z, "z", a, same_term);
}

}  // namespace detail

/// Left- and right-hand sides of a fully instantiated scheme.
inline std::pair<Term, Term> scheme_sides(Axiom a, const Instantiation& inst) { return detail::sides(a, inst); }

struct AppliedStep {
  Term result;
  RewriteStep step;  // with the complete instantiation
};

inline AppliedStep apply_step(const Term& t, const RewriteStep& step) {
  const Term& sub = subterm_at(t, step.path);
  Instantiation inst = detail::match(step.axiom, step.direction, sub);
  detail::merge(inst, step.inst, step.axiom);
  auto [lhs, rhs] = detail::sides(step.axiom, inst);
  const Term& from = step.direction == Direction::lr ? lhs : rhs;
  const Term& to = step.direction == Direction::lr ? rhs : lhs;
  if (!alpha_eq(from, sub)) throw Error(std::string(to_string(step.axiom)) + ": internal error: rebuilt side differs");
  RewriteStep full = step;
  full.inst = inst;
  return {replace_at(t, step.path, to), std::move(full)};
}

/// Rewrites the subterm at step.path with one axiom instance.
inline Term apply_axiom(const Term& t, const RewriteStep& step) { return apply_step(t, step).result; }

// ---------------------------------------------------------------------------
// Derived rules, expanded into primitive steps
// ---------------------------------------------------------------------------

enum class Macro { Scale, RatioComm };

inline std::optional<Macro> parse_macro(const std::string& s) {
  if (s == "Scale") return Macro::Scale;
  if (s == "RatioComm") return Macro::RatioComm;
  return std::nullopt;
}

namespace detail {

inline Path join(const Path& a, std::initializer_list<Branch> b) {
  Path out = a;
  out.insert(out.end(), b);
  return out;
}

/// Steps rewriting x ?_{ki,kj} y (the subterm at `at`) into x ?_{i,j} y.
inline void scale_down(Term& t, const Path& at, const BigInt& k, std::vector<RewriteStep>& out) {
  const Term& sub = subterm_at(t, at);
  if (!sub.is(Kind::ratio)) throw Error("Scale: expected a ratio choice at " + to_string(at));
  if (k < 1) throw Error("Scale: factor must be positive");
  if (k == 1) return;
  if (sub.i() % k != 0 || sub.j() % k != 0) throw Error("Scale: weights are not divisible by " + k.str());
  BigInt i = sub.i() / k, j = sub.j() / k;
  auto run = [&](RewriteStep s) {
    auto applied = apply_step(t, s);
    t = applied.result;
    out.push_back(applied.step);
  };
  auto step = [&](Axiom a, Direction d, Path p, Instantiation inst = {}) { run({a, d, std::move(p), std::move(inst)}); };
  if (i == 0 || j == 0) {
    // Both sides collapse to one branch by the zero law.
    bool left_zero = i == 0;
    if (left_zero) step(Axiom::ConvexSymm, Direction::lr, at);
    const Term& cur = subterm_at(t, at);
    Term other = cur.right();
    BigInt w = left_zero ? j : i;
    step(Axiom::ConvexZero, Direction::lr, at);
    Instantiation z;
    z.i = w;
    z.y = other;
    step(Axiom::ConvexZero, Direction::rl, at, z);
    if (left_zero) step(Axiom::ConvexSymm, Direction::lr, at);
    return;
  }
  Instantiation il, ir, root;
  il.i = i, il.j = (k - 1) * i;
  ir.i = j, ir.j = (k - 1) * j;
  step(Axiom::ConvexIdem, Direction::rl, join(at, {Branch::left}), il);
  step(Axiom::ConvexIdem, Direction::rl, join(at, {Branch::right}), ir);
  step(Axiom::ConvexDistr, Direction::rl, at);
  scale_down(t, join(at, {Branch::right}), k - 1, out);
  step(Axiom::ConvexIdem, Direction::lr, at);
}

inline RewriteStep invert(RewriteStep s) {
  s.direction = s.direction == Direction::lr ? Direction::rl : Direction::lr;
  return s;
}

/// Steps rewriting x ?_{i,j} y (at `at`) into x ?_{ki,kj} y.
inline void scale_up(Term& t, const Path& at, const BigInt& k, std::vector<RewriteStep>& out) {
  const Term& sub = subterm_at(t, at);
  if (!sub.is(Kind::ratio)) throw Error("Scale: expected a ratio choice at " + to_string(at));
  if (k < 1) throw Error("Scale: factor must be positive");
  Term target = replace_at(t, at, Term::ratio(sub.i() * k, sub.j() * k, sub.left(), sub.right()));
  std::vector<RewriteStep> down;
  Term probe = target;
  scale_down(probe, at, k, down);
  for (auto it = down.rbegin(); it != down.rend(); ++it) {
    auto applied = apply_step(t, invert(*it));
    t = applied.result;
    out.push_back(applied.step);
  }
}

}  // namespace detail

/// Primitive steps for one derived-rule application; `t` is advanced past them.
///   Scale LR k:  x ?_{ki,kj} y  ->  x ?_{i,j} y       (RL is the converse)
///   RatioComm:   (w ?_{ij} x) ?_{kl} (y ?_{ij} z)  ->  (w ?_{kl} y) ?_{ij} (x ?_{kl} z)
inline std::vector<RewriteStep> expand_macro(Term& t, Macro m, Direction d, const Path& at, const std::optional<BigInt>& k) {
  std::vector<RewriteStep> out;
  if (m == Macro::Scale) {
    if (!k) throw Error("Scale needs a factor k");
    if (d == Direction::lr) detail::scale_down(t, at, *k, out);
    else detail::scale_up(t, at, *k, out);
    return out;
  }
  const Term& sub = subterm_at(t, at);
  if (!sub.is(Kind::ratio) || !sub.left().is(Kind::ratio) || !sub.right().is(Kind::ratio) ||
      sub.left().i() != sub.right().i() || sub.left().j() != sub.right().j())
    throw Error("RatioComm: expected (w ?_{ij} x) ?_{kl} (y ?_{ij} z) at " + to_string(at));
  BigInt i = sub.left().i(), j = sub.left().j(), kk = sub.i(), l = sub.j();
  if (i == 0 || j == 0 || kk == 0 || l == 0) throw Error("RatioComm: all weights must be positive");
  using detail::join;
  detail::scale_up(t, at, i + j, out);
  detail::scale_up(t, join(at, {Branch::left}), kk, out);
  detail::scale_up(t, join(at, {Branch::right}), l, out);
  auto applied = apply_step(t, {Axiom::ConvexDistr, Direction::lr, at, {}});
  t = applied.result;
  out.push_back(applied.step);
  detail::scale_down(t, join(at, {Branch::left}), i, out);
  detail::scale_down(t, join(at, {Branch::right}), j, out);
  detail::scale_down(t, at, kk + l, out);
  return out;
}

// ---------------------------------------------------------------------------
// Derivations
// ---------------------------------------------------------------------------

class DerivationError : public Error {
 public:
  DerivationError(std::size_t index, const std::string& msg)
      : Error("step " + std::to_string(index + 1) + ": " + msg), index_(index) {}
  std::size_t index() const { return index_; }

 private:
  std::size_t index_;
};

namespace detail {

inline void require_wellformed(const Context& ctx, const Term& t, std::size_t index) {
  auto v = check_wellformed(ctx, t);
  if (!v.empty())
    throw DerivationError(index, "result is not well-formed at " + to_string(v.front().path) + ": " + v.front().message);
}

}  // namespace detail

/// True iff applying the steps to `start` yields a term α-equal to `end`.
inline bool check_derivation(const Context& ctx, const Term& start, const std::vector<RewriteStep>& steps,
                             const Term& end) {
  detail::require_wellformed(ctx, start, 0);
  Term cur = start;
  for (std::size_t s = 0; s < steps.size(); ++s) {
    try {
      cur = apply_axiom(cur, steps[s]);
    } catch (const DerivationError&) {
      throw;
    } catch (const Error& e) {
      throw DerivationError(s, e.what());
    }
    detail::require_wellformed(ctx, cur, s);
  }
  return alpha_eq(cur, end);
}

/// One line of a derivation file: an axiom or derived rule, a direction, a path, and
/// metavariable values (terms unparsed until the binders along the path are known).
struct DerivationLine {
  std::string name;
  Direction direction = Direction::lr;
  Path path;
  std::map<std::string, std::string> values;
  std::size_t line_number = 0;
};

struct DerivationFile {
  std::optional<std::string> context;
  std::optional<std::string> start, end;
  std::vector<DerivationLine> lines;
};

namespace detail {

inline std::vector<std::string> split_fields(const std::string& line, std::size_t line_number) {
  std::vector<std::string> out;
  std::string cur;
  int depth = 0;
  for (char c : line) {
    if (c == '{') ++depth;
    if (c == '}') --depth;
    if (depth < 0) throw Error("line " + std::to_string(line_number) + ": unbalanced '}'");
    if (depth == 0 && std::isspace(static_cast<unsigned char>(c))) {
      if (!cur.empty()) out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  if (depth != 0) throw Error("line " + std::to_string(line_number) + ": unbalanced '{'");
  if (!cur.empty()) out.push_back(cur);
  return out;
}

inline std::string strip_braces(const std::string& v) {
  if (v.size() >= 2 && v.front() == '{' && v.back() == '}') return v.substr(1, v.size() - 2);
  return v;
}

}  // namespace detail

/// Parses a derivation file.  Blank lines and '#' comments are ignored; optional header
/// lines "context ...", "start ...", "end ..." give the endpoints.
inline DerivationFile parse_derivation(const std::string& text) {
  DerivationFile f;
  std::istringstream in(text);
  std::string raw;
  std::size_t number = 0;
  while (std::getline(in, raw)) {
    ++number;
    std::string line = raw.substr(0, raw.find('#'));
    auto fields = detail::split_fields(line, number);
    if (fields.empty()) continue;
    const std::string& head = fields[0];
    auto rest = [&] {
      std::size_t at = line.find(head) + head.size();
      std::string r = line.substr(at);
      auto b = r.find_first_not_of(" \t");
      auto e = r.find_last_not_of(" \t\r");
      return b == std::string::npos ? std::string() : r.substr(b, e - b + 1);
    };
    if (head == "context") {
      f.context = rest();
      continue;
    }
    if (head == "start") {
      f.start = detail::strip_braces(rest());
      continue;
    }
    if (head == "end") {
      f.end = detail::strip_braces(rest());
      continue;
    }
    if (!parse_axiom(head) && !parse_macro(head))
      throw Error("line " + std::to_string(number) + ": unknown axiom or rule '" + head + "'");
    DerivationLine d;
    d.name = head;
    d.line_number = number;
    if (fields.size() < 2 || (fields[1] != "LR" && fields[1] != "RL"))
      throw Error("line " + std::to_string(number) + ": expected direction LR or RL");
    d.direction = fields[1] == "LR" ? Direction::lr : Direction::rl;
    bool have_path = false;
    for (std::size_t k = 2; k < fields.size(); ++k) {
      auto eq = fields[k].find('=');
      if (eq == std::string::npos || fields[k].front() == '{') {
        if (have_path) throw Error("line " + std::to_string(number) + ": unexpected '" + fields[k] + "'");
        d.path = parse_path(fields[k]);
        have_path = true;
        continue;
      }
      std::string key = fields[k].substr(0, eq), value = fields[k].substr(eq + 1);
      if (key == "path") {
        d.path = parse_path(value);
        have_path = true;
      } else {
        d.values[key] = value;
      }
    }
    f.lines.push_back(std::move(d));
  }
  return f;
}

/// Resolves a line's metavariable values against the term it will be applied to.
inline Instantiation resolve_values(const Context& ctx, const Term& t, const DerivationLine& d) {
  Context local = ctx;
  for (const auto& b : binders_along(t, d.path)) local.params.push_back(b);
  Instantiation s;
  for (const auto& [key, value] : d.values) {
    if (key == "i" || key == "j" || key == "k" || key == "l") {
      BigInt v = parse_bigint(value);
      (key == "i" ? s.i : key == "j" ? s.j : key == "k" ? s.k : s.l) = v;
    } else if (key == "p" || key == "q") {
      if (!is_identifier(value)) throw Error("'" + value + "' is not a parameter name");
      (key == "p" ? s.p : s.q) = value;
    } else if (key == "w" || key == "x" || key == "y" || key == "z") {
      Term v = parse_term(detail::strip_braces(value), local);
      (key == "w" ? s.w : key == "x" ? s.x : key == "y" ? s.y : s.z) = v;
    } else {
      throw Error("unknown metavariable '" + key + "'");
    }
  }
  return s;
}

struct ReplayResult {
  bool ok = false;
  Term final_term;
  std::vector<RewriteStep> steps;  // primitive steps actually applied
};

/// Applies every line (expanding derived rules) and compares the result with `end`.
inline ReplayResult replay(const Context& ctx, const Term& start, const std::vector<DerivationLine>& lines,
                           const Term& end) {
  detail::require_wellformed(ctx, start, 0);
  ReplayResult r;
  Term cur = start;
  for (std::size_t s = 0; s < lines.size(); ++s) {
    const auto& d = lines[s];
    try {
      if (auto m = parse_macro(d.name)) {
        std::optional<BigInt> k;
        if (auto it = d.values.find("k"); it != d.values.end()) k = parse_bigint(it->second);
        auto steps = expand_macro(cur, *m, d.direction, d.path, k);
        r.steps.insert(r.steps.end(), steps.begin(), steps.end());
      } else {
        RewriteStep step{*parse_axiom(d.name), d.direction, d.path, resolve_values(ctx, cur, d)};
        auto applied = apply_step(cur, step);
        cur = applied.result;
        r.steps.push_back(applied.step);
      }
    } catch (const DerivationError&) {
      throw;
    } catch (const Error& e) {
      throw DerivationError(s, std::string("line ") + std::to_string(d.line_number) + ": " + e.what());
    }
    detail::require_wellformed(ctx, cur, s);
  }
  r.final_term = cur;
  r.ok = alpha_eq(cur, end);
  return r;
}

inline std::string to_string(const RewriteStep& s) {
  std::string out = std::string(to_string(s.axiom)) + " " + to_string(s.direction) + " path=" + to_string(s.path);
  const auto& v = s.inst;
  auto nat = [&](const char* n, const std::optional<BigInt>& x) {
    if (x) out += std::string(" ") + n + "=" + x->str();
  };
  auto par = [&](const char* n, const std::optional<std::string>& x) {
    if (x) out += std::string(" ") + n + "=" + *x;
  };
  auto term = [&](const char* n, const std::optional<Term>& x) {
    if (x) out += std::string(" ") + n + "={" + print(*x) + "}";
  };
  nat("i", v.i), nat("j", v.j), nat("k", v.k), nat("l", v.l);
  par("p", v.p), par("q", v.q);
  term("w", v.w), term("x", v.x), term("y", v.y), term("z", v.z);
  return out;
}

}  // namespace bb
