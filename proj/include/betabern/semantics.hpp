#pragma once

#include "betabern/normalizer.hpp"

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace bb {

/// Polynomial arguments for the context variables.  The polynomial for a variable of
/// arity m lives in m + symbols variables: its formal parameters, then `symbols` extra
/// indeterminates shared by every argument and carried through to the result.
struct FuncArg {
  std::size_t symbols = 0;
  std::map<std::string, Poly> functions;
};

namespace detail {

class Interpreter {
 public:
  Interpreter(const Context& ctx, const FuncArg& args) : ctx_(ctx), args_(args) {
    base_ = ctx.params.size() + args.symbols;
    for (const auto& v : ctx.vars) {
      auto it = args.functions.find(v.name);
      if (it == args.functions.end()) throw Error("missing argument for variable '" + v.name + "'");
      if (it->second.nvars() != v.arity + args.symbols)
        throw Error("argument for '" + v.name + "' has " + std::to_string(it->second.nvars()) +
                    " variable(s), expected arity " + std::to_string(v.arity) + " plus " +
                    std::to_string(args.symbols) + " symbol(s)");
    }
  }

  Poly run(const Term& t) {
    std::vector<std::string> env;
    return eval(t, env);
  }

 private:
  // env: names of the enclosing binders, outermost first; binder r is ring variable base_+r.
  std::size_t resolve(const std::string& p, const std::vector<std::string>& env) const {
    for (std::size_t r = env.size(); r-- > 0;)
      if (env[r] == p) return base_ + r;
    if (auto idx = ctx_.param_index(p)) return *idx;
    throw Error("parameter '" + p + "' is not in scope");
  }

  bool closed_over_context(const Term& t, const std::vector<std::string>& env) const {
    for (const auto& p : t.free_params())
      if (std::find(env.begin(), env.end(), p) != env.end()) return false;
    return true;
  }

  Poly eval(const Term& t, std::vector<std::string>& env) {
    if (!env.empty() && closed_over_context(t, env)) {
      std::vector<std::string> empty;
      return eval(t, empty).extended(env.size());
    }
    bool memoize = env.empty();
    if (memoize)
      if (auto it = memo_.find(t.id()); it != memo_.end()) return it->second.second;
    Poly out = compute(t, env);
    if (memoize) memo_.emplace(t.id(), std::make_pair(t, out));
    return out;
  }

  Poly compute(const Term& t, std::vector<std::string>& env) {
    std::size_t ring = base_ + env.size();
    switch (t.kind()) {
      case Kind::var_app: {
        const VarDecl* v = ctx_.find_var(t.name());
        if (!v) throw Error("unknown variable '" + t.name() + "'");
        if (v->arity != t.args().size()) throw Error("arity mismatch for '" + t.name() + "'");
        std::vector<std::size_t> slot;
        for (const auto& a : t.args()) slot.push_back(resolve(a, env));
        for (std::size_t s = 0; s < args_.symbols; ++s) slot.push_back(ctx_.params.size() + s);
        const Poly& f = args_.functions.at(t.name());
        std::vector<std::uint32_t> exps(f.term_count() * ring, 0);
        std::vector<Rat> coeffs;
        coeffs.reserve(f.term_count());
        for (std::size_t n = 0; n < f.term_count(); ++n) {
          for (std::size_t k = 0; k < slot.size(); ++k) exps[n * ring + slot[k]] += f.exponents(n)[k];
          coeffs.push_back(f.coeff(n));
        }
        return Poly::from_terms(ring, exps, std::move(coeffs));
      }
      case Kind::ratio: {
        Rat s = t.i() + t.j();
        Poly out = eval(t.left(), env) * Rat(Rat(t.i()) / s);
        out += eval(t.right(), env) * Rat(Rat(t.j()) / s);
        return out;
      }
      case Kind::param_choice: {
        std::size_t p = resolve(t.name(), env);
        Poly r = eval(t.right(), env);
        Poly diff = eval(t.left(), env) - r;
        return std::move(r) + std::move(diff).times_variable(p);
      }
      case Kind::nu: {
        env.push_back(t.name());
        Poly body = eval(t.body(), env);
        env.pop_back();
        BetaParams b{t.i(), t.j()};
        std::map<std::size_t, Rat> moments;
        return body.integrate_last([&](std::size_t a) {
          auto it = moments.find(a);
          if (it == moments.end()) it = moments.emplace(a, beta_moment(b, a, 0)).first;
          return it->second;
        });
      }
    }
    throw Error("unreachable");
  }

  const Context& ctx_;
  const FuncArg& args_;
  std::size_t base_ = 0;
  std::map<const void*, std::pair<Term, Poly>> memo_;
};

}  // namespace detail

/// Functional interpretation: a polynomial in the context parameters (then the symbols).
inline Poly interpret(const Context& ctx, const Term& t, const FuncArg& args) {
  return detail::Interpreter(ctx, args).run(t);
}

/// The chain's functional applied to `arg` (arity + symbols variables).
inline Poly chain_functional(const Context& ctx, const Chain& c, const Poly& arg, std::size_t symbols = 0) {
  std::size_t ell = ctx.params.size();
  if (arg.nvars() != c.args.size() + symbols)
    throw Error("argument has " + std::to_string(arg.nvars()) + " variable(s) but chain variable '" + c.var +
                "' takes " + std::to_string(c.args.size()));
  std::size_t ring = ell + symbols + c.dimension();
  Poly p(ring);
  Exponents e(ring);
  for (const auto& [fe, coef] : arg.terms()) {
    std::fill(e.begin(), e.end(), 0);
    for (std::size_t k = 0; k < c.args.size(); ++k) {
      const auto& a = c.args[k];
      e[a.is_bound() ? ell + symbols + a.index - 1 : a.index] += fe[k];
    }
    for (std::size_t s = 0; s < symbols; ++s) e[ell + s] += fe[c.args.size() + s];
    p.add_term(e, coef);
  }
  for (std::size_t r = c.dimension(); r-- > 0;) {
    BetaParams b{c.binders[r].i, c.binders[r].j};
    p = p.integrate_last([&](std::size_t a) { return beta_moment(b, a, 0); });
  }
  return p;
}

/// Σ_I b_{I,k}(p) Σ_j (w_Ij / Σ_j w_Ij) ⟦c_j⟧(f)(p).
inline Poly interpret_normalform(const NormalForm& nf, const FuncArg& args) {
  std::size_t ell = nf.ell();
  std::size_t ring = ell + args.symbols;
  std::vector<Poly> chain_values;
  for (const auto& c : nf.chains) {
    auto it = args.functions.find(c.var);
    if (it == args.functions.end()) throw Error("missing argument for variable '" + c.var + "'");
    chain_values.push_back(chain_functional(nf.ctx, c, it->second, args.symbols));
  }
  Poly out(ring);
  for (std::size_t f = 0; f < nf.weights.size(); ++f) {
    const auto& row = nf.weights[f];
    BigInt total = 0;
    for (const auto& w : row) total += w;
    if (total == 0) throw Error("normal form has an all-zero weight row");
    Poly leaf(ring);
    for (std::size_t c = 0; c < row.size(); ++c)
      if (row[c] != 0) leaf += chain_values[c] * Rat(row[c], total);
    out += leaf * bernstein_multi(multi_index(f, nf.k, ell), nf.k, ring);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Linear independence of chains
// ---------------------------------------------------------------------------

/// Exact rank of a rational matrix (Gaussian elimination).
inline std::size_t matrix_rank(std::vector<std::vector<Rat>> m) {
  std::size_t rank = 0;
  std::size_t cols = m.empty() ? 0 : m[0].size();
  for (std::size_t col = 0; col < cols && rank < m.size(); ++col) {
    std::size_t pivot = rank;
    while (pivot < m.size() && m[pivot][col] == 0) ++pivot;
    if (pivot == m.size()) continue;
    std::swap(m[pivot], m[rank]);
    for (std::size_t r = rank + 1; r < m.size(); ++r) {
      if (m[r][col] == 0) continue;
      Rat factor = m[r][col] / m[rank][col];
      for (std::size_t c = col; c < cols; ++c) m[r][c] -= factor * m[rank][c];
    }
    ++rank;
  }
  return rank;
}

/// All exponent vectors of length m with total degree <= D.
inline std::vector<Exponents> monomials_up_to(std::size_t m, std::size_t D) {
  std::vector<Exponents> out;
  Exponents e(m, 0);
  std::function<void(std::size_t, std::size_t)> go = [&](std::size_t pos, std::size_t left) {
    if (pos == m) {
      out.push_back(e);
      return;
    }
    for (std::size_t a = 0; a <= left; ++a) {
      e[pos] = static_cast<std::uint32_t>(a);
      go(pos + 1, left - a);
    }
    e[pos] = 0;
  };
  go(0, D);
  return out;
}

/// Rank of the matrix M[c][(x, μ)] = ⟦c⟧(x ↦ μ)(p) over monomials μ of degree <= D.
inline std::size_t chain_rank(const Context& ctx, const std::vector<Chain>& chains, const std::vector<Rat>& p,
                              std::size_t D) {
  if (p.size() != ctx.params.size()) throw Error("need one evaluation point per context parameter");
  std::vector<std::pair<std::string, Exponents>> columns;
  std::map<std::string, std::size_t> arity;
  for (const auto& c : chains) arity[c.var] = c.args.size();
  for (const auto& [x, m] : arity)
    for (auto& mu : monomials_up_to(m, D)) columns.emplace_back(x, std::move(mu));
  std::vector<std::vector<Rat>> m;
  for (const auto& c : chains) {
    std::vector<Rat> row;
    for (const auto& [x, mu] : columns)
      row.push_back(x == c.var ? chain_functional(ctx, c, Poly::monomial(mu)).evaluate(p) : Rat(0));
    m.push_back(std::move(row));
  }
  return matrix_rank(std::move(m));
}

inline std::vector<Rat> prime_reciprocals(std::size_t count) {
  std::vector<Rat> out;
  for (std::size_t cand = 2; out.size() < count; ++cand) {
    bool prime = true;
    for (std::size_t d = 2; d * d <= cand; ++d)
      if (cand % d == 0) prime = false;
    if (prime) out.emplace_back(BigInt(1), BigInt(cand));
  }
  return out;
}

/// True iff the chains' functionals at the point p are linearly independent when tested
/// on monomials up to degree D (default 2n).  The point's coordinates must be distinct.
inline bool chain_rank_check(const Context& ctx, const std::vector<Chain>& chains,
                             std::optional<std::vector<Rat>> p = std::nullopt, std::optional<std::size_t> D = std::nullopt) {
  std::vector<Rat> point = p ? *p : prime_reciprocals(ctx.params.size());
  for (std::size_t a = 0; a < point.size(); ++a)
    for (std::size_t b = a + 1; b < point.size(); ++b)
      if (point[a] == point[b]) throw Error("evaluation point coordinates must be distinct");
  std::size_t degree = 0;
  if (D) {
    degree = *D;
  } else {
    BigInt n = 2;
    for (const auto& c : chains) n = std::max(n, chain_level(c));
    degree = 2 * to_size(n, "level");
  }
  return chain_rank(ctx, chains, point, degree) == chains.size();
}

// ---------------------------------------------------------------------------
// Terms from Bernstein coefficient tables
// ---------------------------------------------------------------------------

/// coeffs[I][j]: weight of the j-th context variable (all of arity 0) at multi-index I.
inline Term term_from_bernstein(const Context& ctx, std::size_t k, const std::vector<std::vector<Rat>>& coeffs) {
  for (const auto& v : ctx.vars)
    if (v.arity != 0) throw Error("variable '" + v.name + "' must have arity 0");
  if (coeffs.size() != cell_count(k, ctx.params.size()))
    throw Error("expected " + std::to_string(cell_count(k, ctx.params.size())) + " coefficient rows");
  std::vector<Term> vars;
  for (const auto& v : ctx.vars) vars.push_back(Term::app(v.name));
  for (std::size_t f = 0; f < coeffs.size(); ++f) {
    if (coeffs[f].size() != ctx.vars.size()) throw Error("coefficient row has the wrong length");
    Rat sum = 0;
    for (const auto& c : coeffs[f]) {
      if (c < 0) throw Error("negative Bernstein coefficient " + to_string(c));
      sum += c;
    }
    if (sum != 1) throw Error("coefficients at row " + std::to_string(f) + " sum to " + to_string(sum) + ", not 1");
  }
  return build_diagram(ctx, k, [&](std::size_t f) { return multichoice(vars, primitive(coeffs[f])); });
}

// ---------------------------------------------------------------------------
// Semantic equality oracle
// ---------------------------------------------------------------------------

/// Generic argument: f_x(a) = t_x Σ_{|e|<=D} z_x^e a^e, with a tag t_x and one z per slot.
/// The coefficient of t_x z_x^e in ⟦t⟧ is ⟦t⟧ applied to the monomial a^e for x.
inline FuncArg generic_argument(const Context& ctx, std::size_t D) {
  FuncArg args;
  for (const auto& v : ctx.vars) args.symbols += v.arity + 1;
  std::size_t offset = 0;
  for (const auto& v : ctx.vars) {
    std::size_t m = v.arity;
    std::size_t nv = m + args.symbols;
    auto monomials = monomials_up_to(m, D);
    std::vector<std::uint32_t> exps(monomials.size() * nv, 0);
    for (std::size_t n = 0; n < monomials.size(); ++n) {
      std::uint32_t* e = exps.data() + n * nv;
      for (std::size_t r = 0; r < m; ++r) {
        e[r] = monomials[n][r];
        e[m + offset + r] = monomials[n][r];
      }
      e[m + offset + m] = 1;
    }
    args.functions.emplace(v.name, Poly::from_terms(nv, exps, std::vector<Rat>(monomials.size(), Rat(1))));
    offset += m + 1;
  }
  return args;
}

/// Degree bound for oracle comparisons: 2 · max arity · node count of the larger term.
inline std::size_t oracle_degree(const Context& ctx, const Term& t, const Term& u) {
  return 2 * ctx.max_arity() * std::max(t.size(), u.size());
}

/// Exact comparison of ⟦t⟧ and ⟦u⟧ on every monomial argument of degree <= D,
/// symbolically in the context parameters.
inline bool functionally_equal(const Context& ctx, const Term& t, const Term& u, std::optional<std::size_t> D = std::nullopt) {
  FuncArg args = generic_argument(ctx, D ? *D : oracle_degree(ctx, t, u));
  // One interpreter, so subterms shared between t and u are evaluated once.
  detail::Interpreter run(ctx, args);
  return run.run(t) == run.run(u);
}

}  // namespace bb
