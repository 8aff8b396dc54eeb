#pragma once

#include "betabern/bernstein.hpp"
#include "betabern/chain.hpp"

#include <nlohmann/json.hpp>

#include <functional>
#include <map>
#include <optional>
#include <sstream>
#include <tuple>
#include <vector>

namespace bb {

// ---------------------------------------------------------------------------
// Stage 1: push every binder down to the variable applications
// ---------------------------------------------------------------------------

namespace detail {

class NuPusher {
 public:
  Term push(const Term& t) {
    if (auto it = memo_.find(t.id()); it != memo_.end()) return it->second.second;
    Term out = t;
    switch (t.kind()) {
      case Kind::var_app:
        break;
      case Kind::ratio:
        if (t.i() == 0) out = push(t.right());
        else if (t.j() == 0) out = push(t.left());
        else out = ratio(t.i(), t.j(), t, push(t.left()), push(t.right()));
        break;
      case Kind::param_choice: {
        Term l = push(t.left()), r = push(t.right());
        if (!l.same_node(t.left()) || !r.same_node(t.right())) out = Term::choice(t.name(), l, r);
        break;
      }
      case Kind::nu:
        out = nu_push(t.i(), t.j(), t.name(), push(t.body()));
        break;
    }
    memo_.emplace(t.id(), std::make_pair(t, out));
    return out;
  }

 private:
  static Term ratio(const BigInt& i, const BigInt& j, const Term& orig, Term l, Term r) {
    if (l.same_node(orig.left()) && r.same_node(orig.right())) return orig;
    return Term::ratio(i, j, std::move(l), std::move(r));
  }

  // `b` is already in pushed form: choices above, chains below.
  Term nu_push(const BigInt& i, const BigInt& j, const std::string& p, const Term& b) {
    if (!b.has_free(p)) return b;  // D1
    auto key = std::make_tuple(b.id(), i, j, p);
    if (auto it = nu_memo_.find(key); it != nu_memo_.end()) return it->second.second;
    Term out;
    switch (b.kind()) {
      case Kind::ratio:  // C4
        out = Term::ratio(b.i(), b.j(), nu_push(i, j, p, b.left()), nu_push(i, j, p, b.right()));
        break;
      case Kind::param_choice:
        if (b.name() == p)  // Conj
          out = Term::ratio(i, j, nu_push(i + 1, j, p, b.left()), nu_push(i, j + 1, p, b.right()));
        else  // C3
          out = Term::choice(b.name(), nu_push(i, j, p, b.left()), nu_push(i, j, p, b.right()));
        break;
      case Kind::var_app:
      case Kind::nu:
        out = Term::nu(i, j, p, b);
        break;
    }
    nu_memo_.emplace(key, std::make_pair(b, out));
    return out;
  }

  // Keys are node addresses; the key term is kept alive so addresses are never reused.
  std::map<const void*, std::pair<Term, Term>> memo_;
  std::map<std::tuple<const void*, BigInt, BigInt, std::string>, std::pair<Term, Term>> nu_memo_;
};

inline void collect_chain_levels(const Term& t, BigInt& level, std::set<const void*>& seen) {
  if (!seen.insert(t.id()).second) return;
  switch (t.kind()) {
    case Kind::var_app:
      return;
    case Kind::nu:
      for (const Term* c = &t; c->is(Kind::nu); c = &c->body()) level = std::max(level, BigInt(c->i() + c->j()));
      return;
    case Kind::ratio:
    case Kind::param_choice:
      collect_chain_levels(t.left(), level, seen);
      collect_chain_levels(t.right(), level, seen);
      return;
  }
}

}  // namespace detail

/// Derivably equal term in which every binder sits in a chain at a leaf
/// (Conj, C3, C4, D1; zero-weight ratio choices are dropped by ConvexZero).
inline Term push_nu_to_leaves(const Term& t) { return detail::NuPusher().push(t); }

/// Maximum binder level i+j over the chains of a pushed term (0 if there are none).
inline BigInt max_chain_level(const Term& pushed) {
  BigInt level = 0;
  std::set<const void*> seen;
  detail::collect_chain_levels(pushed, level, seen);
  return level;
}

// ---------------------------------------------------------------------------
// Stratified mixture tables
// ---------------------------------------------------------------------------

/// Leaf mixtures of a stratified diagram, indexed by a multi-index whose r-th entry
/// counts right branches on parameter r (entries range over 0..deg[r]).
struct MixtureTable {
  std::vector<std::size_t> deg;
  std::vector<Mixture> cells;

  std::size_t flat(const std::vector<std::size_t>& idx) const {
    std::size_t f = 0;
    for (std::size_t r = 0; r < deg.size(); ++r) f = f * (deg[r] + 1) + idx[r];
    return f;
  }
  std::vector<std::size_t> index(std::size_t f) const {
    std::vector<std::size_t> idx(deg.size());
    for (std::size_t r = deg.size(); r-- > 0;) {
      idx[r] = f % (deg[r] + 1);
      f /= deg[r] + 1;
    }
    return idx;
  }
  std::size_t max_degree() const {
    std::size_t k = 0;
    for (auto d : deg) k = std::max(k, d);
    return k;
  }
};

namespace detail {

inline void add_scaled(Mixture& into, const Mixture& m, const Rat& s) {
  if (s == 0) return;
  for (const auto& [c, w] : m) add_to(into, c, w * s);
}

inline std::size_t cells_for(const std::vector<std::size_t>& deg) {
  std::size_t n = 1;
  for (auto d : deg) n *= d + 1;
  return n;
}

/// Degree elevation along one parameter axis.
inline MixtureTable elevate_axis(const MixtureTable& t, std::size_t axis) {
  MixtureTable out{t.deg, {}};
  std::size_t d = t.deg[axis];
  out.deg[axis] = d + 1;
  out.cells.resize(cells_for(out.deg));
  for (std::size_t f = 0; f < out.cells.size(); ++f) {
    auto idx = out.index(f);
    std::size_t s = idx[axis];
    if (s <= d) add_scaled(out.cells[f], t.cells[t.flat(idx)], Rat(BigInt(d + 1 - s), BigInt(d + 1)));
    if (s >= 1) {
      idx[axis] = s - 1;
      add_scaled(out.cells[f], t.cells[t.flat(idx)], Rat(BigInt(s), BigInt(d + 1)));
    }
  }
  return out;
}

inline MixtureTable elevate_to(MixtureTable t, const std::vector<std::size_t>& deg) {
  for (std::size_t r = 0; r < deg.size(); ++r)
    while (t.deg[r] < deg[r]) t = elevate_axis(t, r);
  return t;
}

class TableBuilder {
 public:
  TableBuilder(const Context& ctx, std::optional<BigInt> level) : ctx_(ctx), level_(std::move(level)) {}

  const MixtureTable& build(const Term& t) {
    if (auto it = memo_.find(t.id()); it != memo_.end()) return it->second.second;
    MixtureTable out;
    std::size_t ell = ctx_.params.size();
    switch (t.kind()) {
      case Kind::var_app:
      case Kind::nu: {
        Chain c = chain_from_term(ctx_, t);
        out.deg.assign(ell, 0);
        out.cells.resize(1);
        if (level_ && c.dimension() > 0) out.cells[0] = raise_chain(c, *level_);
        else out.cells[0].emplace(c, Rat(1));
        break;
      }
      case Kind::ratio: {
        auto [l, r] = aligned(t);
        Rat wl(t.i(), t.i() + t.j()), wr(t.j(), t.i() + t.j());
        out.deg = l.deg;
        out.cells.resize(l.cells.size());
        for (std::size_t f = 0; f < out.cells.size(); ++f) {
          add_scaled(out.cells[f], l.cells[f], wl);
          add_scaled(out.cells[f], r.cells[f], wr);
        }
        break;
      }
      case Kind::param_choice: {
        auto axis = ctx_.param_index(t.name());
        if (!axis) throw Error("choice on parameter '" + t.name() + "' outside the context; push binders first");
        auto [l, r] = aligned(t);
        std::size_t d = l.deg[*axis];
        out.deg = l.deg;
        out.deg[*axis] = d + 1;
        out.cells.resize(cells_for(out.deg));
        // p b_{s,d} = (d+1-s)/(d+1) b_{s,d+1};  (1-p) b_{s,d} = (s+1)/(d+1) b_{s+1,d+1}
        for (std::size_t f = 0; f < out.cells.size(); ++f) {
          auto idx = out.index(f);
          std::size_t s = idx[*axis];
          if (s <= d) add_scaled(out.cells[f], l.cells[l.flat(idx)], Rat(BigInt(d + 1 - s), BigInt(d + 1)));
          if (s >= 1) {
            idx[*axis] = s - 1;
            add_scaled(out.cells[f], r.cells[r.flat(idx)], Rat(BigInt(s), BigInt(d + 1)));
          }
        }
        break;
      }
    }
    return memo_.emplace(t.id(), std::make_pair(t, std::move(out))).first->second.second;
  }

 private:
  std::pair<MixtureTable, MixtureTable> aligned(const Term& t) {
    MixtureTable l = build(t.left());
    MixtureTable r = build(t.right());
    std::vector<std::size_t> deg(l.deg.size());
    for (std::size_t k = 0; k < deg.size(); ++k) deg[k] = std::max(l.deg[k], r.deg[k]);
    return {elevate_to(std::move(l), deg), elevate_to(std::move(r), deg)};
  }

  const Context& ctx_;
  std::optional<BigInt> level_;
  std::map<const void*, std::pair<Term, MixtureTable>> memo_;
};

}  // namespace detail

/// Mixture table of a pushed term; with `level` set, chains are raised to that level.
inline MixtureTable mixture_table(const Context& ctx, const Term& pushed, std::optional<BigInt> level = std::nullopt) {
  return detail::TableBuilder(ctx, std::move(level)).build(pushed);
}

inline MixtureTable elevate_table(const MixtureTable& t, std::size_t k) {
  return detail::elevate_to(t, std::vector<std::size_t>(t.deg.size(), k));
}

inline MixtureTable raise_table(MixtureTable t, const BigInt& n) {
  for (auto& cell : t.cells) cell = raise_mixture(cell, n);
  return t;
}

// ---------------------------------------------------------------------------
// Term-level stages
// ---------------------------------------------------------------------------

/// Replaces every chain of a pushed term by the mixture of its level-n raisings.
inline Term raise_level(const Context& ctx, const Term& pushed, const BigInt& n) {
  BigInt present = max_chain_level(pushed);
  if (n < present) throw Error("level " + n.str() + " is below the level " + present.str() + " present in the term");
  std::map<const void*, std::pair<Term, Term>> memo;
  std::function<Term(const Term&)> go = [&](const Term& t) -> Term {
    if (auto it = memo.find(t.id()); it != memo.end()) return it->second.second;
    Term out = t;
    if (t.is(Kind::nu)) {
      Mixture m = raise_chain(chain_from_term(ctx, t), n);
      std::vector<Term> terms;
      std::vector<Rat> ws;
      for (const auto& [c, w] : m) {
        terms.push_back(to_term(ctx, c));
        ws.push_back(w);
      }
      out = multichoice(terms, primitive(ws));
    } else if (t.is(Kind::ratio) || t.is(Kind::param_choice)) {
      Term l = go(t.left()), r = go(t.right());
      out = t.is(Kind::ratio) ? Term::ratio(t.i(), t.j(), l, r) : Term::choice(t.name(), l, r);
    }
    memo.emplace(t.id(), std::make_pair(t, out));
    return out;
  };
  return go(pushed);
}

/// Nested permutation-invariant diagrams of depth k over the context parameters, in
/// context order, with leaf(flat multi-index) at the bottom.
inline Term build_diagram(const Context& ctx, std::size_t k, const std::function<Term(std::size_t)>& leaf) {
  std::size_t ell = ctx.params.size();
  std::map<std::tuple<std::size_t, std::size_t, std::size_t, std::size_t>, Term> memo;
  std::map<std::size_t, Term> leaves;
  std::function<Term(std::size_t, std::size_t, std::size_t, std::size_t)> node =
      [&](std::size_t r, std::size_t d, std::size_t s, std::size_t prefix) -> Term {
    if (r == ell) {
      auto it = leaves.find(prefix);
      if (it == leaves.end()) it = leaves.emplace(prefix, leaf(prefix)).first;
      return it->second;
    }
    if (d == k) return node(r + 1, 0, 0, prefix * (k + 1) + s);
    auto key = std::make_tuple(r, d, s, prefix);
    if (auto it = memo.find(key); it != memo.end()) return it->second;
    Term t = Term::choice(ctx.params[r], node(r, d + 1, s, prefix), node(r, d + 1, s + 1, prefix));
    memo.emplace(key, t);
    return t;
  };
  return node(0, 0, 0, 0);
}

inline std::pair<std::vector<Chain>, std::vector<BigInt>> split_mixture(const Mixture& m) {
  std::vector<Chain> chains;
  std::vector<Rat> ws;
  for (const auto& [c, w] : m) {
    chains.push_back(c);
    ws.push_back(w);
  }
  return {std::move(chains), primitive(ws)};
}

inline Term mixture_term(const Context& ctx, const Mixture& m) {
  auto [chains, ws] = split_mixture(m);
  std::vector<Term> terms;
  for (const auto& c : chains) terms.push_back(to_term(ctx, c));
  return multichoice(terms, ws);
}

struct StratifiedDiagram {
  Context ctx;
  std::size_t k = 0;
  std::vector<Term> leaves;  // row-major over {0..k}^ℓ

  Term to_term() const {
    return build_diagram(ctx, k, [&](std::size_t f) { return leaves.at(f); });
  }
};

/// Stratifies a pushed, level-raised term into a depth-k diagram per parameter.
inline StratifiedDiagram stratify(const Context& ctx, const Term& t, std::size_t k) {
  MixtureTable table = mixture_table(ctx, t);
  if (table.max_degree() > k)
    throw Error("depth " + std::to_string(k) + " is too small: the term needs depth " +
                std::to_string(table.max_degree()));
  table = elevate_table(table, k);
  StratifiedDiagram out{ctx, k, {}};
  for (const auto& cell : table.cells) out.leaves.push_back(mixture_term(ctx, cell));
  return out;
}

/// Distinct chains of a choice-free leaf with their primitive integer weights.
inline std::pair<std::vector<Chain>, std::vector<BigInt>> collect_chains(const Context& ctx, const Term& leaf) {
  MixtureTable table = mixture_table(ctx, push_nu_to_leaves(leaf));
  if (table.cells.size() != 1) throw Error("leaf still contains parameter choices");
  return split_mixture(table.cells[0]);
}

// ---------------------------------------------------------------------------
// Normal forms
// ---------------------------------------------------------------------------

struct NormalForm {
  Context ctx;
  std::size_t k = 0;
  BigInt n = 2;
  std::vector<Chain> chains;
  std::vector<std::vector<BigInt>> weights;  // one row per multi-index, row-major

  std::size_t ell() const { return ctx.params.size(); }

  friend bool operator==(const NormalForm& a, const NormalForm& b) {
    return a.k == b.k && a.n == b.n && a.chains == b.chains && a.weights == b.weights &&
           a.ctx.params == b.ctx.params;
  }
};

/// Normal form over the given chain columns (which must cover every cell's support).
inline NormalForm to_normal_form(const Context& ctx, const MixtureTable& table, std::size_t k, const BigInt& n,
                                 std::vector<Chain> columns) {
  NormalForm nf{ctx, k, n, std::move(columns), {}};
  std::map<Chain, std::size_t> pos;
  for (std::size_t c = 0; c < nf.chains.size(); ++c) pos[nf.chains[c]] = c;
  for (const auto& cell : table.cells) {
    std::vector<Rat> row(nf.chains.size(), Rat(0));
    for (const auto& [c, w] : cell) row.at(pos.at(c)) = w;
    nf.weights.push_back(primitive(row));
  }
  return nf;
}

inline std::vector<Chain> support(const MixtureTable& table) {
  std::set<Chain> all;
  for (const auto& cell : table.cells)
    for (const auto& [c, w] : cell) all.insert(c);
  return {all.begin(), all.end()};
}

/// A term's mixture table at its canonical level and depth.
struct Normalized {
  MixtureTable table;
  std::size_t k = 0;
  BigInt n = 2;
};

inline Normalized normalize_table(const Context& ctx, const Term& t) {
  auto problems = check_wellformed(ctx, t);
  if (!problems.empty())
    throw Error("term is not well-formed at " + to_string(problems.front().path) + ": " + problems.front().message);
  Term pushed = push_nu_to_leaves(t);
  BigInt n = std::max(BigInt(2), max_chain_level(pushed));
  MixtureTable table = mixture_table(ctx, pushed, n);
  std::size_t k = table.max_degree();
  return {elevate_table(table, k), k, n};
}

inline NormalForm normalize(const Context& ctx, const Term& t) {
  Normalized r = normalize_table(ctx, t);
  return to_normal_form(ctx, r.table, r.k, r.n, support(r.table));
}

/// Both normal forms at the common depth and level, over the merged chain list.
inline std::pair<NormalForm, NormalForm> join_normalize(const Context& ctx, const Term& t, const Term& u) {
  Normalized a = normalize_table(ctx, t), b = normalize_table(ctx, u);
  std::size_t k = std::max(a.k, b.k);
  BigInt n = std::max(a.n, b.n);
  MixtureTable ta = elevate_table(a.n == n ? a.table : raise_table(a.table, n), k);
  MixtureTable tb = elevate_table(b.n == n ? b.table : raise_table(b.table, n), k);
  std::set<Chain> all;
  for (const auto& c : support(ta)) all.insert(c);
  for (const auto& c : support(tb)) all.insert(c);
  std::vector<Chain> columns(all.begin(), all.end());
  return {to_normal_form(ctx, ta, k, n, columns), to_normal_form(ctx, tb, k, n, columns)};
}

/// Canonical term for a normal form: parameter diagrams in context order with each leaf
/// a right-nested multichoice over the chains, zero columns skipped.
inline Term reify(const NormalForm& nf) {
  std::vector<Term> chain_terms;
  for (const auto& c : nf.chains) chain_terms.push_back(to_term(nf.ctx, c));
  if (nf.weights.size() != cell_count(nf.k, nf.ell())) throw Error("normal form has the wrong number of rows");
  return build_diagram(nf.ctx, nf.k, [&](std::size_t f) { return multichoice(chain_terms, nf.weights.at(f)); });
}

// ---------------------------------------------------------------------------
// Serialization
// ---------------------------------------------------------------------------

namespace detail {

inline nlohmann::json int_json(const BigInt& v) {
  if (v >= BigInt(std::numeric_limits<std::int64_t>::min()) && v <= BigInt(std::numeric_limits<std::int64_t>::max()))
    return v.convert_to<std::int64_t>();
  return v.str();
}

inline BigInt json_int(const nlohmann::json& j) {
  if (j.is_string()) return parse_bigint(j.get<std::string>());
  if (j.is_number_integer()) return BigInt(j.get<std::int64_t>());
  throw Error("expected an integer in normal-form JSON");
}

inline std::string index_string(const std::vector<std::size_t>& idx) {
  std::string s = "(";
  for (std::size_t r = 0; r < idx.size(); ++r) s += (r ? "," : "") + std::to_string(idx[r]);
  return s + ")";
}

}  // namespace detail

inline nlohmann::json to_json(const Context& ctx, const Chain& c) {
  nlohmann::json j;
  j["binders"] = nlohmann::json::array();
  for (const auto& b : c.binders) j["binders"].push_back({detail::int_json(b.i), detail::int_json(b.j)});
  j["var"] = c.var;
  j["args"] = nlohmann::json::array();
  for (const auto& a : c.args) {
    if (a.is_bound()) j["args"].push_back({{"bound", a.index}});
    else j["args"].push_back({{"free", ctx.params.at(a.index)}});
  }
  return j;
}

inline nlohmann::json to_json(const NormalForm& nf) {
  nlohmann::json j;
  j["context"] = print(nf.ctx);
  j["k"] = nf.k;
  j["n"] = detail::int_json(nf.n);
  j["chains"] = nlohmann::json::array();
  for (const auto& c : nf.chains) j["chains"].push_back(to_json(nf.ctx, c));
  j["weights"] = nlohmann::json::array();
  for (std::size_t f = 0; f < nf.weights.size(); ++f) {
    nlohmann::json row = nlohmann::json::array();
    for (const auto& w : nf.weights[f]) row.push_back(detail::int_json(w));
    j["weights"].push_back({{"index", multi_index(f, nf.k, nf.ell())}, {"row", row}});
  }
  return j;
}

inline NormalForm normal_form_from_json(const nlohmann::json& j) {
  try {
    NormalForm nf;
    nf.ctx = parse_context(j.at("context").get<std::string>());
    nf.k = j.at("k").get<std::size_t>();
    nf.n = detail::json_int(j.at("n"));
    for (const auto& jc : j.at("chains")) {
      Chain c;
      for (const auto& b : jc.at("binders")) c.binders.push_back({detail::json_int(b.at(0)), detail::json_int(b.at(1))});
      c.var = jc.at("var").get<std::string>();
      for (const auto& a : jc.at("args")) {
        if (a.contains("bound")) {
          c.args.push_back(ArgRef::bound_param(a.at("bound").get<std::size_t>()));
        } else {
          auto idx = nf.ctx.param_index(a.at("free").get<std::string>());
          if (!idx) throw Error("chain argument names an unknown parameter");
          c.args.push_back(ArgRef::free_param(*idx));
        }
      }
      nf.chains.push_back(std::move(c));
    }
    for (const auto& jr : j.at("weights")) {
      std::vector<BigInt> row;
      for (const auto& w : jr.at("row")) row.push_back(detail::json_int(w));
      nf.weights.push_back(std::move(row));
    }
    return nf;
  } catch (const nlohmann::json::exception& e) {
    throw Error(std::string("malformed normal-form JSON: ") + e.what());
  }
}

inline std::string to_text(const NormalForm& nf) {
  std::ostringstream os;
  os << "context: " << print(nf.ctx) << "\n";
  os << "k = " << nf.k << "\n";
  os << "n = " << nf.n << "\n";
  os << "chains:\n";
  for (std::size_t c = 0; c < nf.chains.size(); ++c)
    os << "  c" << (c + 1) << " = " << to_string(nf.ctx, nf.chains[c]) << "\n";
  os << "weights:\n";
  for (std::size_t f = 0; f < nf.weights.size(); ++f) {
    os << "  " << detail::index_string(multi_index(f, nf.k, nf.ell())) << " ";
    for (const auto& w : nf.weights[f]) os << " " << w;
    os << "\n";
  }
  return os.str();
}

}  // namespace bb
