#pragma once

#include "betabern/decide.hpp"
#include "betabern/semantics.hpp"
#include "betabern/simulate.hpp"
#include "betabern/suite/examples.hpp"
#include "betabern/suite/generators.hpp"

#include <chrono>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

namespace bb::suite {

struct CriterionResult {
  int id = 0;
  std::string title;
  bool correct = false;
  double seconds = 0;
  double limit = 0;
  std::string detail;

  bool pass() const { return correct && seconds < limit; }
};

namespace detail {

struct Tally {
  std::size_t checked = 0, failed = 0;
  std::string first_failure;

  void record(bool ok, const std::function<std::string()>& describe) {
    ++checked;
    if (ok) return;
    if (failed++ == 0) first_failure = describe();
  }
  std::string summary(const std::string& what) const {
    std::string s = std::to_string(checked) + " " + what + ", " + std::to_string(failed) + " failed";
    if (failed) s += "; first: " + first_failure;
    return s;
  }
};

inline CriterionResult timed(int id, std::string title, double limit, const std::function<bool(std::string&)>& body) {
  CriterionResult r;
  r.id = id;
  r.title = std::move(title);
  r.limit = limit;
  auto start = std::chrono::steady_clock::now();
  try {
    r.correct = body(r.detail);
  } catch (const std::exception& e) {
    r.correct = false;
    r.detail = std::string("exception: ") + e.what();
  }
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return r;
}

inline std::string row_string(const std::vector<BigInt>& row) {
  std::string s = "(";
  for (std::size_t c = 0; c < row.size(); ++c) s += (c ? "," : "") + row[c].str();
  return s + ")";
}

}  // namespace detail

/// Mixing coin flips with a parameter choice: ((m ?_p x) ?_p (y ?_p m)).
inline Term von_neumann(const Term& m) {
  Term x = Term::app("x"), y = Term::app("y");
  return Term::choice("p", Term::choice("p", m, x), Term::choice("p", y, m));
}

inline CriterionResult golden_normalizations() {
  return detail::timed(1, "golden normalizations", 1.0, [](std::string& detail) {
    Context ctx = parse_context("vars: y, z");
    struct Case {
      const char* term;
      const char* expect;
    } cases[] = {{"nu[1,1]p.pch[p](pch[p](y,z), z)", "rch[1,2](y,z)"},
                 {"nu[1,1]p.nu[1,1]q.pch[p](pch[q](y,z), z)", "rch[1,3](y,z)"}};
    bool ok = true;
    for (const auto& c : cases) {
      Term got = reify(normalize(ctx, parse_term(c.term, ctx)));
      bool same = alpha_eq(got, parse_term(c.expect, ctx));
      ok = ok && same;
      detail += std::string(detail.empty() ? "" : "; ") + print(got) + (same ? "" : " (expected " + std::string(c.expect) + ")");
    }
    return ok;
  });
}

inline CriterionResult von_neumann_fixed_point() {
  return detail::timed(2, "von Neumann fixed point is unique", 5.0, [](std::string& detail) {
    Context ctx = parse_context("params: p ; vars: x, y");
    Term x = Term::app("x"), y = Term::app("y");
    Term coin = Term::ratio(1, 1, x, y);
    bool ok = decide(ctx, coin, von_neumann(coin)).equal;
    if (!ok) detail = "fair coin is not a fixed point; ";
    std::size_t others = 0;
    for (int a = 0; a <= 6; ++a)
      for (int b = 0; a + b <= 6; ++b) {
        if (a == b || a + b == 0 || std::gcd(a, b) != 1) continue;
        ++others;
        Term m = multichoice({x, y}, {BigInt(a), BigInt(b)});
        if (decide(ctx, m, von_neumann(m)).equal) {
          ok = false;
          detail += "(" + std::to_string(a) + "," + std::to_string(b) + ") is a fixed point; ";
        }
      }
    detail += "fair coin fixed; " + std::to_string(others) + " other weight vectors checked";
    return ok;
  });
}

inline CriterionResult non_derivable_instance() {
  return detail::timed(3, "non-derivable equation and its distinguishing context", 1.0, [](std::string& detail) {
    Context ctx = parse_context("vars: x:2, y, z");
    Term lhs = parse_term("nu[1,1]p.x(p,p)", ctx), rhs = parse_term("nu[1,1]p.nu[1,1]q.x(p,q)", ctx);
    Verdict v = decide(ctx, lhs, rhs);
    Context sub_ctx = parse_context("params: p, q ; vars: y, z");
    Bindings b{{"x", Replacement{{"p", "q"}, parse_term("pch[p](pch[q](y,z), z)", sub_ctx)}}};
    Context ground = parse_context("vars: y, z");
    NormalForm l = normalize(ground, substitute(lhs, b)), r = normalize(ground, substitute(rhs, b));
    auto names = [&](const NormalForm& nf) {
      std::string s;
      for (const auto& c : nf.chains) s += to_string(nf.ctx, c) + " ";
      return s;
    };
    bool shape = l.weights.size() == 1 && r.weights.size() == 1;
    bool ok = !v.equal && shape && l.weights[0] == std::vector<BigInt>{1, 2} && r.weights[0] == std::vector<BigInt>{1, 3} &&
              names(l) == "y z " && names(r) == "y z ";
    detail = std::string(v.equal ? "decided equal" : "decided not equal");
    if (shape) detail += "; weights " + detail::row_string(l.weights[0]) + " vs " + detail::row_string(r.weights[0]) +
                         " over " + names(l);
    return ok;
  });
}

inline CriterionResult axiom_soundness(std::size_t per_axiom = 200, std::uint64_t seed = 4) {
  return detail::timed(4, "axiom soundness sweep", 60.0, [=](std::string& detail) {
    Rng rng(seed);
    Context ctx = axiom_context();
    detail::Tally tally;
    for (Axiom a : all_axioms)
      for (std::size_t n = 0; n < per_axiom; ++n) {
        Instantiation inst = random_instantiation(rng, ctx, a);
        auto [lhs, rhs] = scheme_sides(a, inst);
        tally.record(functionally_equal(ctx, lhs, rhs), [&] {
          return std::string(to_string(a)) + ": " + print(lhs) + " vs " + print(rhs);
        });
      }
    detail = tally.summary("instances");
    return tally.failed == 0;
  });
}

inline CriterionResult normalizer_preservation(std::size_t count = 500, std::uint64_t seed = 5) {
  return detail::timed(5, "normalization preserves meaning and is idempotent", 120.0, [=](std::string& detail) {
    Rng rng(seed);
    detail::Tally tally;
    for (std::size_t n = 0; n < count; ++n) {
      Context ctx = random_context(rng);
      Term t = random_term(rng, ctx);
      NormalForm nf = normalize(ctx, t);
      Term back = reify(nf);
      bool same = functionally_equal(ctx, t, back, oracle_degree(ctx, t, t));
      bool idem = normalize(ctx, back) == nf;
      tally.record(same && idem, [&] {
        return print(ctx) + " | " + print(t) + (same ? "" : " [meaning]") + (idem ? "" : " [idempotence]");
      });
    }
    detail = tally.summary("terms");
    return tally.failed == 0;
  });
}

inline CriterionResult decision_coherence(std::size_t count = 300, std::uint64_t seed = 6) {
  return detail::timed(6, "decision procedure agrees with rewriting and semantics", 120.0, [=](std::string& detail) {
    Rng rng(seed);
    detail::Tally rewritten, independent;
    std::size_t equal_pairs = 0;
    for (std::size_t n = 0; n < count; ++n) {
      Context ctx = random_context(rng);
      Term start = random_term(rng, ctx);
      Term cur = start;
      std::size_t steps = uniform(rng, 1, 10), applied = 0;
      for (std::size_t s = 0; s < steps; ++s)
        if (auto step = random_rewrite(rng, ctx, cur)) {
          cur = step->result;
          ++applied;
        }
      rewritten.record(applied > 0 && decide(ctx, start, cur).equal, [&] {
        return print(start) + " vs " + print(cur) + " after " + std::to_string(applied) + " steps";
      });
    }
    for (std::size_t n = 0; n < count; ++n) {
      Context ctx = random_context(rng);
      TermShape shape;
      // Small terms make semantically equal independent pairs reasonably common.
      if (n % 2 == 0) shape.max_size = 5;
      Term t = random_term(rng, ctx, shape), u = random_term(rng, ctx, shape);
      bool d = decide(ctx, t, u).equal;
      bool o = functionally_equal(ctx, t, u);
      equal_pairs += o;
      independent.record(d == o, [&] {
        return print(t) + " vs " + print(u) + ": decide " + (d ? "equal" : "differ") + ", semantics " +
               (o ? "equal" : "differ");
      });
    }
    detail = rewritten.summary("rewritten pairs") + "; " + independent.summary("independent pairs") + " (" +
             std::to_string(equal_pairs) + " semantically equal)";
    return rewritten.failed == 0 && independent.failed == 0;
  });
}

inline CriterionResult bernstein_round_trip(std::size_t count = 100, std::uint64_t seed = 7) {
  return detail::timed(7, "Bernstein tables round-trip through terms", 30.0, [=](std::string& detail) {
    Rng rng(seed);
    detail::Tally tally;
    for (std::size_t n = 0; n < count; ++n) {
      BernsteinCase c = random_bernstein_case(rng);
      const Context& ctx = c.ctx;
      std::size_t ell = ctx.params.size();
      Term t = term_from_bernstein(ctx, c.k, c.coeffs);
      bool meaning = true;
      for (std::size_t j = 0; j < ctx.vars.size(); ++j) {
        FuncArg e;
        for (std::size_t v = 0; v < ctx.vars.size(); ++v)
          e.functions.emplace(ctx.vars[v].name, Poly::constant(0, v == j ? 1 : 0));
        Poly expect(ell);
        for (std::size_t f = 0; f < c.coeffs.size(); ++f)
          expect += bernstein_multi(multi_index(f, c.k, ell), c.k, ell) * c.coeffs[f][j];
        meaning = meaning && interpret(ctx, t, e) == expect;
      }
      NormalForm nf = normalize(ctx, t);
      // Expected: columns for the variables with some nonzero weight, rows made primitive.
      std::vector<std::size_t> live;
      for (std::size_t v = 0; v < ctx.vars.size(); ++v)
        for (const auto& row : c.coeffs)
          if (row[v] != 0) {
            live.push_back(v);
            break;
          }
      bool table = nf.k == (ell == 0 ? 0 : c.k) && nf.chains.size() == live.size() && nf.weights.size() == c.coeffs.size();
      for (std::size_t col = 0; table && col < live.size(); ++col)
        table = nf.chains[col].var == ctx.vars[live[col]].name && nf.chains[col].dimension() == 0;
      for (std::size_t f = 0; table && f < c.coeffs.size(); ++f) {
        std::vector<Rat> row;
        for (auto v : live) row.push_back(c.coeffs[f][v]);
        table = nf.weights[f] == primitive(row);
      }
      tally.record(meaning && table, [&] {
        return print(ctx) + " k=" + std::to_string(c.k) + (meaning ? "" : " [meaning]") + (table ? "" : " [table]");
      });
    }
    detail = tally.summary("tables");
    return tally.failed == 0;
  });
}

inline CriterionResult chain_independence() {
  return detail::timed(8, "chain functionals are independent at distinct parameters", 10.0, [](std::string& detail) {
    Context ctx = parse_context("params: p, q ; vars: x:2");
    auto chains = ten_chains();
    std::size_t distinct = chain_rank(ctx, chains, {Rat(1, 2), Rat(1, 3)}, 4);
    bool full = chain_rank_check(ctx, chains, std::vector<Rat>{Rat(1, 2), Rat(1, 3)}, 4);
    std::size_t equal = chain_rank(ctx, chains, {Rat(1, 2), Rat(1, 2)}, 4);
    detail = "rank " + std::to_string(distinct) + " at (1/2,1/3); rank " + std::to_string(equal) + " at (1/2,1/2)";
    return full && distinct == 10 && equal < 10;
  });
}

inline CriterionResult operational_agreement(std::size_t count = 20, std::uint64_t trials = 100000,
                                             std::uint64_t seed = 9) {
  return detail::timed(9, "simulators agree with exact distributions", 120.0, [=](std::string& detail) {
    Rng rng(seed);
    Context ground = ground_context();
    std::vector<Term> terms;
    for (std::size_t n = 0; n < count; ++n) terms.push_back(random_ground_term(rng));
    Context yz = parse_context("vars: y, z");
    Term one = parse_term("nu[1,1]p.pch[p](pch[p](y,z), z)", yz);
    Term two = parse_term("nu[1,1]p.nu[1,1]q.pch[p](pch[q](y,z), z)", yz);
    detail::Tally agree, distinguish;
    std::uint64_t stream = 0;
    auto run = [&](const Context& ctx, const Term& t) {
      for (Impl impl : {Impl::polya, Impl::betabern}) {
        TrialReport r = compare(ctx, t, trials, seed * 1000 + stream++, impl);
        agree.record(r.pass, [&] {
          std::ostringstream os;
          os << to_string(impl) << " on " << print(t) << ": chi2 " << r.chi_square << " >= " << r.threshold;
          return os.str();
        });
      }
    };
    for (const auto& t : terms) run(ground, t);
    run(yz, one);
    run(yz, two);
    for (Impl impl : {Impl::polya, Impl::betabern})
      for (int dir = 0; dir < 2; ++dir) {
        const Term& sim = dir ? two : one;
        const Term& ref = dir ? one : two;
        TrialReport r = compare_with(yz, sim, exact_distribution(yz, ref), trials, seed * 1000 + stream++, impl);
        distinguish.record(!r.pass, [&] { return std::string(to_string(impl)) + " failed to distinguish the pair"; });
      }
    detail = agree.summary("comparisons") + "; " + distinguish.summary("cross-comparisons");
    return agree.failed == 0 && distinguish.failed == 0;
  });
}

inline std::vector<std::function<CriterionResult()>> all_criteria() {
  return {golden_normalizations, von_neumann_fixed_point, non_derivable_instance,
          [] { return axiom_soundness(); },      [] { return normalizer_preservation(); },
          [] { return decision_coherence(); },   [] { return bernstein_round_trip(); },
          chain_independence,                    [] { return operational_agreement(); }};
}

inline std::string to_line(const CriterionResult& r) {
  std::ostringstream os;
  os << "criterion " << r.id << ": " << (r.pass() ? "PASS" : "FAIL") << "  " << r.title << "  ["
     << std::fixed << std::setprecision(2) << r.seconds << " s / " << r.limit << " s]  " << r.detail;
  return os.str();
}

}  // namespace bb::suite
