#pragma once

#include "betabern/syntax.hpp"

#include <map>
#include <set>
#include <string>
#include <tuple>
#include <vector>

namespace bb {

/// One argument slot of a chain's variable application: a context parameter (0-based
/// index into the parameter list) or one of the chain's own binders (1-based).
struct ArgRef {
  enum class Kind { free, bound };
  Kind kind = Kind::free;
  std::size_t index = 0;

  static ArgRef free_param(std::size_t i) { return {Kind::free, i}; }
  static ArgRef bound_param(std::size_t i) { return {Kind::bound, i}; }
  bool is_bound() const { return kind == Kind::bound; }

  friend auto operator<=>(const ArgRef&, const ArgRef&) = default;
};

struct Binder {
  BigInt i, j;
  BigInt level() const { return i + j; }
  friend bool operator==(const Binder& a, const Binder& b) { return a.i == b.i && a.j == b.j; }
  friend bool operator<(const Binder& a, const Binder& b) { return std::tie(a.i, a.j) < std::tie(b.i, b.j); }
};

/// A sequence of binders ending in one variable application.  Canonical chains have no
/// unused binders and number their binders by first occurrence in the argument list.
struct Chain {
  std::vector<Binder> binders;  // outermost first
  std::string var;
  std::vector<ArgRef> args;

  std::size_t dimension() const { return binders.size(); }

  friend bool operator==(const Chain& a, const Chain& b) {
    return a.var == b.var && a.binders == b.binders && a.args == b.args;
  }
  /// Canonical order: variable name, dimension, argument map, binder list.
  friend bool operator<(const Chain& a, const Chain& b) {
    if (a.var != b.var) return a.var < b.var;
    if (a.binders.size() != b.binders.size()) return a.binders.size() < b.binders.size();
    if (a.args != b.args) return a.args < b.args;
    return a.binders < b.binders;
  }
};

/// Largest binder level i+j in the chain, or 0 for a bare variable.
inline BigInt chain_level(const Chain& c) {
  BigInt m = 0;
  for (const auto& b : c.binders) m = std::max(m, b.level());
  return m;
}

/// Drops unused binders and renumbers the remaining ones by first occurrence.
inline Chain canonicalize(const Chain& c) {
  std::vector<std::size_t> order;  // old 1-based binder indices in first-use order
  std::map<std::size_t, std::size_t> renumber;
  for (const auto& a : c.args)
    if (a.is_bound() && !renumber.count(a.index)) {
      order.push_back(a.index);
      renumber[a.index] = order.size();
    }
  Chain out;
  out.var = c.var;
  for (auto old : order) out.binders.push_back(c.binders.at(old - 1));
  for (const auto& a : c.args) out.args.push_back(a.is_bound() ? ArgRef::bound_param(renumber[a.index]) : a);
  return out;
}

/// Reads a ν-sequence ending in a variable application as a canonical chain.
inline Chain chain_from_term(const Context& ctx, const Term& t) {
  Chain raw;
  std::vector<std::string> names;
  const Term* cur = &t;
  while (cur->is(Kind::nu)) {
    raw.binders.push_back({cur->i(), cur->j()});
    names.push_back(cur->name());
    cur = &cur->body();
  }
  if (!cur->is(Kind::var_app)) throw Error("not a chain: " + print(t));
  raw.var = cur->name();
  for (const auto& a : cur->args()) {
    std::size_t k = names.size();
    while (k > 0 && names[k - 1] != a) --k;
    if (k > 0) {
      raw.args.push_back(ArgRef::bound_param(k));
    } else if (auto idx = ctx.param_index(a)) {
      raw.args.push_back(ArgRef::free_param(*idx));
    } else {
      throw Error("parameter '" + a + "' is not in scope in chain " + print(t));
    }
  }
  return canonicalize(raw);
}

/// Binder names used when a chain is written as a term: b1, b2, ... kept clear of Γ.
inline std::vector<std::string> chain_binder_names(const Context& ctx, std::size_t d) {
  std::set<std::string> avoid(ctx.params.begin(), ctx.params.end());
  std::vector<std::string> out;
  for (std::size_t r = 1; r <= d; ++r) {
    std::string base = "b" + std::to_string(r);
    std::string name = avoid.count(base) ? fresh_name("b", avoid) : base;
    avoid.insert(name);
    out.push_back(name);
  }
  return out;
}

inline Term to_term(const Context& ctx, const Chain& c) {
  auto names = chain_binder_names(ctx, c.dimension());
  std::vector<std::string> args;
  for (const auto& a : c.args) args.push_back(a.is_bound() ? names.at(a.index - 1) : ctx.params.at(a.index));
  Term t = Term::app(c.var, std::move(args));
  for (std::size_t r = c.dimension(); r-- > 0;) t = Term::nu(c.binders[r].i, c.binders[r].j, names[r], t);
  return t;
}

inline std::string to_string(const Context& ctx, const Chain& c) { return print(to_term(ctx, c)); }

using Mixture = std::map<Chain, Rat>;

inline void add_to(Mixture& m, const Chain& c, const Rat& w) {
  if (w == 0) return;
  auto [it, inserted] = m.try_emplace(c, w);
  if (!inserted) {
    it->second += w;
    if (it->second == 0) m.erase(it);
  }
}

/// Expresses ν_{i,j} at level n >= i+j as the beta-binomial mixture over ν_{i+a,j+b},
/// a+b = n-(i+j), obtained by repeated conjugate expansion.
inline std::vector<std::pair<Binder, Rat>> raise_binder(const Binder& b, const BigInt& n) {
  BigInt m = b.level();
  if (n < m) throw Error("cannot lower binder level " + m.str() + " to " + n.str());
  std::size_t extra = to_size(n - m, "level increase");
  std::vector<std::pair<Binder, Rat>> out;
  BigInt den = rising(m, extra);
  for (std::size_t a = 0; a <= extra; ++a) {
    BigInt num = binomial(extra, a) * rising(b.i, a) * rising(b.j, extra - a);
    out.push_back({{b.i + a, b.j + (extra - a)}, Rat(num, den)});
  }
  return out;
}

/// The chain rewritten as a mixture of chains whose binders all have level n.
inline Mixture raise_chain(const Chain& c, const BigInt& n) {
  Mixture acc;
  acc.emplace(Chain{{}, c.var, c.args}, Rat(1));
  for (const auto& b : c.binders) {
    auto options = raise_binder(b, n);
    Mixture next;
    for (const auto& [partial, w] : acc)
      for (const auto& [nb, nw] : options) {
        Chain ext = partial;
        ext.binders.push_back(nb);
        add_to(next, ext, w * nw);
      }
    acc = std::move(next);
  }
  return acc;
}

inline Mixture raise_mixture(const Mixture& m, const BigInt& n) {
  Mixture out;
  for (const auto& [c, w] : m)
    for (const auto& [rc, rw] : raise_chain(c, n)) add_to(out, rc, w * rw);
  return out;
}

/// Right-nested ratio choice over the terms with positive weights:
/// [2,3,5] over (x,y,z) becomes rch[2,8](x, rch[3,5](y,z)).
inline Term multichoice(const std::vector<Term>& terms, const std::vector<BigInt>& weights) {
  if (terms.size() != weights.size()) throw Error("multichoice needs one weight per term");
  std::vector<std::size_t> live;
  for (std::size_t c = 0; c < weights.size(); ++c) {
    if (weights[c] < 0) throw Error("negative multichoice weight");
    if (weights[c] > 0) live.push_back(c);
  }
  if (live.empty()) throw Error("multichoice with no positive weight");
  Term t = terms[live.back()];
  BigInt tail = weights[live.back()];
  for (std::size_t r = live.size() - 1; r-- > 0;) {
    t = Term::ratio(weights[live[r]], tail, terms[live[r]], t);
    tail += weights[live[r]];
  }
  return t;
}

}  // namespace bb
