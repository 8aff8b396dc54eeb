#pragma once

#include "betabern/axioms.hpp"
#include "betabern/bernstein.hpp"

#include <algorithm>
#include <random>
#include <string>
#include <vector>

namespace bb::suite {

using Rng = std::mt19937_64;

inline std::size_t uniform(Rng& rng, std::size_t lo, std::size_t hi) {
  return std::uniform_int_distribution<std::size_t>(lo, hi)(rng);
}

inline bool chance(Rng& rng, double p) { return std::uniform_real_distribution<double>(0, 1)(rng) < p; }

template <class T>
const T& pick(Rng& rng, const std::vector<T>& v) {
  return v.at(uniform(rng, 0, v.size() - 1));
}

struct TermShape {
  std::size_t max_size = 25;
  std::size_t max_weight = 4;      // ratio weights 0..max (sum > 0)
  std::size_t max_hyper = 4;       // binder hyperparameters 1..max
  double nu_rate = 0.25;
  double choice_rate = 0.4;        // share of parameter choices among binary nodes
  double zero_weight_rate = 0.1;
};

/// Random context with up to `max_params` parameters and 1..max_vars variables of arity
/// <= max_arity; the first variable always has arity 0.
inline Context random_context(Rng& rng, std::size_t max_params = 3, std::size_t max_vars = 3, std::size_t max_arity = 2) {
  static const std::vector<std::string> params{"p", "q", "r"};
  static const std::vector<std::string> vars{"x", "y", "z"};
  Context ctx;
  std::size_t np = uniform(rng, 0, std::min<std::size_t>(max_params, params.size()));
  for (std::size_t k = 0; k < np; ++k) ctx.params.push_back(params[k]);
  std::size_t nv = uniform(rng, 1, std::min<std::size_t>(max_vars, vars.size()));
  for (std::size_t k = 0; k < nv; ++k) ctx.vars.push_back({vars[k], k == 0 ? 0 : uniform(rng, 0, max_arity)});
  return ctx;
}

namespace detail {

class TermGen {
 public:
  TermGen(Rng& rng, const Context& ctx, const TermShape& shape) : rng_(rng), ctx_(ctx), shape_(shape) {}

  Term gen(std::size_t size, std::vector<std::string>& scope) {
    if (size <= 1) return leaf(scope);
    bool can_nu = size >= 2 && chance(rng_, shape_.nu_rate);
    if (can_nu || size == 2) {
      if (size == 2 && !can_nu) return leaf(scope);
      std::string b = binder_name(scope);
      scope.push_back(b);
      Term body = gen(size - 1, scope);
      scope.pop_back();
      BigInt i = uniform(rng_, 1, shape_.max_hyper), j = uniform(rng_, 1, shape_.max_hyper);
      return Term::nu(i, j, b, body);
    }
    std::size_t left = uniform(rng_, 1, size - 2);
    Term l = gen(left, scope);
    Term r = gen(size - 1 - left, scope);
    if (!scope.empty() && chance(rng_, shape_.choice_rate)) return Term::choice(pick_param(scope), l, r);
    return ratio(l, r);
  }

 private:
  Term ratio(const Term& l, const Term& r) {
    BigInt i = weight(), j = weight();
    if (i + j == 0) i = 1;
    return Term::ratio(i, j, l, r);
  }

  BigInt weight() {
    if (chance(rng_, shape_.zero_weight_rate)) return 0;
    return uniform(rng_, 1, shape_.max_weight);
  }

  // Recently bound parameters are favoured so binders tend to be used.
  std::string pick_param(const std::vector<std::string>& scope) {
    if (scope.size() > ctx_.params.size() && chance(rng_, 0.6)) return scope.back();
    return pick(rng_, scope);
  }

  std::string binder_name(const std::vector<std::string>& scope) {
    static const std::vector<std::string> names{"s", "t", "u", "v"};
    if (!scope.empty() && chance(rng_, 0.05)) return pick(rng_, scope);  // occasional shadowing
    for (const auto& n : names)
      if (std::find(scope.begin(), scope.end(), n) == scope.end()) return n;
    return fresh_name("s", std::set<std::string>(scope.begin(), scope.end()));
  }

  Term leaf(const std::vector<std::string>& scope) {
    std::vector<const VarDecl*> usable;
    for (const auto& v : ctx_.vars)
      if (v.arity == 0 || !scope.empty()) usable.push_back(&v);
    const VarDecl* v = pick(rng_, usable);
    std::vector<std::string> args;
    for (std::size_t k = 0; k < v->arity; ++k) args.push_back(pick_param(scope));
    return Term::app(v->name, std::move(args));
  }

  Rng& rng_;
  const Context& ctx_;
  TermShape shape_;
};

}  // namespace detail

/// Random well-formed term of between 1 and shape.max_size nodes, in `ctx` extended by
/// the parameters in `scope` (for subterms under binders).
inline Term random_term(Rng& rng, const Context& ctx, const TermShape& shape = {},
                        std::vector<std::string> scope = {}) {
  std::vector<std::string> full(ctx.params.begin(), ctx.params.end());
  full.insert(full.end(), scope.begin(), scope.end());
  std::size_t size = uniform(rng, 1, shape.max_size);
  return detail::TermGen(rng, ctx, shape).gen(size, full);
}

/// Context for closed ground terms: no parameters, arity-0 variables x, y, z.
inline Context ground_context() { return parse_context("vars: x, y, z"); }

/// Random closed ground term (choices only on bound parameters).
inline Term random_ground_term(Rng& rng, std::size_t max_size = 15) {
  Context ctx = ground_context();
  TermShape shape;
  shape.max_size = max_size;
  shape.nu_rate = 0.3;
  shape.choice_rate = 0.6;
  return random_term(rng, ctx, shape);
}

// ---------------------------------------------------------------------------
// Axiom instances and rewrites
// ---------------------------------------------------------------------------

/// Context used for scheme instances: two parameters and variables of arity 2, 1, 0.
inline Context axiom_context() { return parse_context("params: p, q ; vars: x:2, y:1, z:0"); }

/// Random complete instantiation of `a` in `ctx` (which must have at least one parameter),
/// with naturals in 1..max_weight and metavariable terms of at most max_size nodes.
inline Instantiation random_instantiation(Rng& rng, const Context& ctx, Axiom a, std::size_t max_weight = 5,
                                          std::size_t max_size = 10) {
  TermShape shape;
  shape.max_size = max_size;
  shape.max_weight = max_weight;
  shape.max_hyper = max_weight;
  auto nat = [&] { return BigInt(uniform(rng, 1, max_weight)); };
  auto nat0 = [&] { return BigInt(uniform(rng, 0, max_weight)); };
  auto term = [&](std::vector<std::string> scope = {}) { return random_term(rng, ctx, shape, std::move(scope)); };
  std::set<std::string> taken(ctx.params.begin(), ctx.params.end());
  std::string b1 = fresh_name("s", taken);
  taken.insert(b1);
  std::string b2 = fresh_name("t", taken);
  Instantiation s;
  switch (a) {
    case Axiom::ConvexDistr:
      do {
        s.i = nat0(), s.j = nat0(), s.k = nat0(), s.l = nat0();
      } while (*s.i + *s.j == 0 || *s.k + *s.l == 0 || *s.i + *s.k == 0 || *s.j + *s.l == 0);
      s.w = term(), s.x = term(), s.y = term(), s.z = term();
      break;
    case Axiom::ConvexSymm:
      s.i = nat(), s.j = nat0(), s.x = term(), s.y = term();
      break;
    case Axiom::ConvexZero:
      s.i = nat(), s.x = term(), s.y = term();
      break;
    case Axiom::ConvexIdem:
      s.i = nat0(), s.j = nat(), s.x = term();
      break;
    case Axiom::C1:
      s.p = pick(rng, ctx.params), s.q = pick(rng, ctx.params);
      s.w = term(), s.x = term(), s.y = term(), s.z = term();
      break;
    case Axiom::C2:
      s.i = nat(), s.j = nat(), s.k = nat(), s.l = nat(), s.p = b1, s.q = b2;
      s.x = term({b1, b2});
      break;
    case Axiom::C3:
      s.i = nat(), s.j = nat(), s.p = b1, s.q = pick(rng, ctx.params);
      s.x = term({b1}), s.y = term({b1});
      break;
    case Axiom::C4:
      s.i = nat(), s.j = nat(), s.k = nat(), s.l = nat0(), s.p = b1;
      s.x = term({b1}), s.y = term({b1});
      break;
    case Axiom::C5:
      s.i = nat(), s.j = nat0(), s.p = pick(rng, ctx.params);
      s.w = term(), s.x = term(), s.y = term(), s.z = term();
      break;
    case Axiom::D1:
      s.i = nat(), s.j = nat(), s.p = b1, s.x = term();
      break;
    case Axiom::D2:
      s.p = pick(rng, ctx.params), s.x = term();
      break;
    case Axiom::Conj:
      s.i = nat(), s.j = nat(), s.p = b1;
      s.x = term({b1}), s.y = term({b1});
      break;
  }
  return s;
}

inline void collect_paths(const Term& t, Path& cur, std::vector<Path>& out) {
  out.push_back(cur);
  auto down = [&](Branch b, const Term& c) {
    cur.push_back(b);
    collect_paths(c, cur, out);
    cur.pop_back();
  };
  switch (t.kind()) {
    case Kind::var_app:
      return;
    case Kind::nu:
      down(Branch::body, t.body());
      return;
    case Kind::ratio:
    case Kind::param_choice:
      down(Branch::left, t.left());
      down(Branch::right, t.right());
      return;
  }
}

inline std::vector<Path> all_paths(const Term& t) {
  std::vector<Path> out;
  Path cur;
  collect_paths(t, cur, out);
  return out;
}

/// Attempts one random axiom rewrite somewhere in `t`; right-to-left steps that need extra
/// metavariables get random values in scope.  Returns the applied step, if any.
inline std::optional<AppliedStep> random_rewrite(Rng& rng, const Context& ctx, const Term& t, std::size_t attempts = 200) {
  auto paths = all_paths(t);
  TermShape small;
  small.max_size = 4;
  for (std::size_t n = 0; n < attempts; ++n) {
    const Path& path = pick(rng, paths);
    Axiom a = all_axioms[uniform(rng, 0, all_axioms.size() - 1)];
    Direction d = chance(rng, 0.5) ? Direction::lr : Direction::rl;
    auto bound = binders_along(t, path);
    std::vector<std::string> scope(ctx.params.begin(), ctx.params.end());
    scope.insert(scope.end(), bound.begin(), bound.end());
    RewriteStep step{a, d, path, {}};
    if (d == Direction::rl) {
      const Term& sub = subterm_at(t, path);
      switch (a) {
        case Axiom::ConvexZero:
          step.inst.i = uniform(rng, 1, 4);
          step.inst.y = random_term(rng, ctx, small, bound);
          break;
        case Axiom::ConvexIdem:
          step.inst.i = uniform(rng, 0, 4);
          step.inst.j = uniform(rng, 1, 4);
          break;
        case Axiom::D1: {
          std::set<std::string> avoid(scope.begin(), scope.end());
          collect_names(sub, avoid);
          step.inst.i = uniform(rng, 1, 4);
          step.inst.j = uniform(rng, 1, 4);
          step.inst.p = fresh_name("s", avoid);
          break;
        }
        case Axiom::D2:
          if (scope.empty()) continue;
          step.inst.p = pick(rng, scope);
          break;
        default:
          break;
      }
    }
    try {
      AppliedStep applied = apply_step(t, step);
      if (check_wellformed(ctx, applied.result).empty()) return applied;
    } catch (const AxiomError&) {
    }
  }
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// Bernstein coefficient tables
// ---------------------------------------------------------------------------

struct BernsteinCase {
  Context ctx;
  std::size_t k = 0;
  std::vector<std::vector<Rat>> coeffs;
};

/// Random nonnegative table with unit row sums over arity-0 variables.
inline BernsteinCase random_bernstein_case(Rng& rng, std::size_t max_k = 3, std::size_t max_params = 2,
                                           std::size_t max_vars = 3) {
  BernsteinCase c;
  c.ctx = random_context(rng, max_params, max_vars, 0);
  c.k = uniform(rng, 0, max_k);
  std::size_t rows = cell_count(c.k, c.ctx.params.size());
  for (std::size_t f = 0; f < rows; ++f) {
    std::vector<BigInt> raw;
    BigInt sum = 0;
    do {
      raw.clear();
      sum = 0;
      for (std::size_t v = 0; v < c.ctx.vars.size(); ++v) {
        raw.push_back(chance(rng, 0.3) ? BigInt(0) : BigInt(uniform(rng, 1, 6)));
        sum += raw.back();
      }
    } while (sum == 0);
    std::vector<Rat> row;
    for (const auto& w : raw) row.emplace_back(w, sum);
    c.coeffs.push_back(std::move(row));
  }
  return c;
}

}  // namespace bb::suite
