#pragma once

#include "betabern/axioms.hpp"
#include "betabern/decide.hpp"
#include "betabern/semantics.hpp"
#include "betabern/simulate.hpp"

#include <functional>
#include <string>
#include <vector>

namespace bb::suite {

struct Example {
  std::string name;
  std::function<bool(std::string&)> check;  // fills in a short observation
};

struct ExampleResult {
  std::string name;
  bool pass = false;
  std::string detail;
};

inline const char* derivation_one_binder = R"(context vars: y, z
start nu[1,1]p.pch[p](pch[p](y,z), z)
end rch[1,2](y,z)
Conj LR .
Conj LR l
D1 LR l.l
D1 LR l.r
D1 LR r
Scale RL . k=3
ConvexZero RL r i=3 y={y}
ConvexSymm LR r
ConvexDistr LR .
ConvexIdem LR l
ConvexIdem LR r
Scale LR . k=2
)";

inline const char* derivation_von_neumann = R"(context params: p ; vars: x, y
start pch[p](pch[p](rch[1,1](x,y), x), pch[p](y, rch[1,1](x,y)))
end rch[1,1](x,y)
ConvexIdem RL l.r i=1 j=1
ConvexIdem RL r.l i=1 j=1
C5 LR l
C5 LR r
ConvexSymm LR l
C5 LR .
D2 LR l
D2 LR r.l
D2 LR r.r
C5 RL .
ConvexSymm LR l
D2 LR .
)";

namespace detail {

inline bool same(const Term& got, const Term& want, std::string& detail) {
  detail = print(got);
  return alpha_eq(got, want);
}

inline bool replays(const char* text, std::string& detail) {
  DerivationFile f = parse_derivation(text);
  Context ctx = parse_context(*f.context);
  ReplayResult r = replay(ctx, parse_term(*f.start, ctx), f.lines, parse_term(*f.end, ctx));
  detail = std::to_string(r.steps.size()) + " primitive steps, ends at " + print(r.final_term);
  return r.ok;
}

inline bool weights_are(const NormalForm& nf, const std::vector<std::string>& chains,
                        const std::vector<std::vector<BigInt>>& rows, std::string& detail) {
  std::vector<std::string> names;
  for (const auto& c : nf.chains) names.push_back(to_string(nf.ctx, c));
  detail = to_text(nf);
  while (!detail.empty() && detail.back() == '\n') detail.pop_back();
  for (auto& ch : detail)
    if (ch == '\n') ch = ';';
  return names == chains && nf.weights == rows;
}

inline bool simulates(const Context& ctx, const Term& t, const Distribution& expect, Impl impl, std::uint64_t seed,
                      std::string& detail) {
  TrialReport r = compare_with(ctx, t, expect, 100000, seed, impl);
  detail = std::string(to_string(impl)) + " chi2 " + std::to_string(r.chi_square);
  return r.pass;
}

}  // namespace detail

/// The ten subspace types of x:2 over two free parameters at level 2.
inline std::vector<Chain> ten_chains() {
  using A = ArgRef;
  std::vector<std::vector<A>> maps = {
      {A::free_param(0), A::free_param(0)},   {A::free_param(0), A::free_param(1)},
      {A::free_param(1), A::free_param(0)},   {A::free_param(1), A::free_param(1)},
      {A::free_param(0), A::bound_param(1)},  {A::bound_param(1), A::free_param(0)},
      {A::free_param(1), A::bound_param(1)},  {A::bound_param(1), A::free_param(1)},
      {A::bound_param(1), A::bound_param(1)}, {A::bound_param(1), A::bound_param(2)}};
  std::vector<Chain> out;
  for (auto& m : maps) {
    std::size_t d = 0;
    for (const auto& a : m)
      if (a.is_bound()) d = std::max(d, a.index);
    out.push_back(Chain{std::vector<Binder>(d, Binder{1, 1}), "x", m});
  }
  return out;
}

/// Worked examples with known answers, each checked end to end.
inline std::vector<Example> examples() {
  using detail::same;
  std::vector<Example> out;
  auto add = [&](std::string name, std::function<bool(std::string&)> f) { out.push_back({std::move(name), std::move(f)}); };

  add("nested binders are well formed", [](std::string& d) {
    Context ctx = parse_context("vars: x:2");
    auto v = check_wellformed(ctx, parse_term("nu[1,1]p.(nu[1,1]q.x(p,q))", ctx));
    d = std::to_string(v.size()) + " violations";
    return v.empty();
  });
  add("binder with j=0 is a violation", [](std::string& d) {
    Context ctx = parse_context("vars: x");
    auto v = check_wellformed(ctx, Term::nu(1, 0, "p", Term::app("x")));
    d = v.empty() ? "no violations" : v.front().message;
    return v.size() == 1 && v.front().message.find("j=0") != std::string::npos;
  });
  add("substitution renames a capturing binder", [](std::string& d) {
    Context ctx = parse_context("params: p ; vars: w, x, y");
    Term t = parse_term("nu[1,1]p.w", ctx);
    Term r = substitute(t, {{"w", Replacement{{}, parse_term("pch[p](x,y)", ctx)}}});
    bool ok = same(r, parse_term("nu[1,1]q.pch[p](x,y)", ctx), d);
    return ok && r.free_params() == std::vector<std::string>{"p"};
  });
  add("substitution maps formal parameters", [](std::string& d) {
    Context ctx = parse_context("vars: z:1, x, y");
    Context inner = parse_context("params: p ; vars: x, y");
    Term r = substitute(parse_term("nu[1,1]p.z(p)", ctx), {{"z", Replacement{{"p"}, parse_term("pch[p](x,y)", inner)}}});
    return same(r, parse_term("nu[1,1]p.pch[p](x,y)", ctx), d);
  });
  add("distinguishing substitution", [](std::string& d) {
    Context ctx = parse_context("vars: x:2, y, z");
    Context inner = parse_context("params: p, q ; vars: y, z");
    Term r = substitute(parse_term("nu[1,1]p.x(p,p)", ctx),
                        {{"x", Replacement{{"p", "q"}, parse_term("pch[p](pch[q](y,z), z)", inner)}}});
    return same(r, parse_term("nu[1,1]p.pch[p](pch[p](y,z), z)", ctx), d);
  });
  add("nested ratio choices parse", [](std::string& d) {
    Context ctx = parse_context("vars: x, y, z");
    Term t = parse_term("rch[2,8](x, rch[3,5](y,z))", ctx);
    d = print(t);
    return t.is(Kind::ratio) && t.i() == 2 && t.j() == 8 && t.left().name() == "x" && t.right().is(Kind::ratio) &&
           t.right().i() == 3 && t.right().j() == 5;
  });
  add("parser rejects a zero hyperparameter", [](std::string& d) {
    try {
      parse_term("nu[0,3]p.x", parse_context("vars: x"));
    } catch (const ParseError& e) {
      d = e.what();
      return e.kind() == ParseError::Kind::zero_hyperparameter;
    }
    d = "accepted";
    return false;
  });
  add("conjugacy step", [](std::string& d) {
    Context ctx = parse_context("vars: x:1, y:1");
    Term r = apply_axiom(parse_term("nu[2,3]p.pch[p](x(p), y(p))", ctx), {Axiom::Conj, Direction::lr, {}, {}});
    return same(r, parse_term("rch[2,3](nu[3,3]p.x(p), nu[2,4]p.y(p))", ctx), d);
  });
  add("zero-weight step", [](std::string& d) {
    Context ctx = parse_context("vars: x, y");
    return same(apply_axiom(parse_term("rch[5,0](x, y)", ctx), {Axiom::ConvexZero, Direction::lr, {}, {}}),
                parse_term("x", ctx), d);
  });
  add("discard step", [](std::string& d) {
    Context ctx = parse_context("vars: x");
    return same(apply_axiom(parse_term("nu[1,1]p.x", ctx), {Axiom::D1, Direction::lr, {}, {}}), parse_term("x", ctx), d);
  });
  add("derivation with one shared binder", [](std::string& d) { return detail::replays(derivation_one_binder, d); });
  add("von Neumann derivation", [](std::string& d) { return detail::replays(derivation_von_neumann, d); });
  add("binder pushed to the leaves", [](std::string& d) {
    Context ctx = parse_context("vars: y, z");
    return same(push_nu_to_leaves(parse_term("nu[1,1]p.pch[p](pch[p](y,z), z)", ctx)),
                parse_term("rch[1,1](rch[2,1](y,z), z)", ctx), d);
  });
  add("unused binder discarded", [](std::string& d) {
    Context ctx = parse_context("vars: y");
    return same(push_nu_to_leaves(parse_term("nu[1,1]p.y", ctx)), parse_term("y", ctx), d);
  });
  add("depth-two tree diagram", [](std::string& d) {
    Context ctx = parse_context("params: p ; vars: v, x, y");
    auto sd = stratify(ctx, parse_term("pch[p](pch[p](v,x), pch[p](y,v))", ctx), 2);
    return same(sd.to_term(), parse_term("pch[p](pch[p](v, rch[1,1](x,y)), pch[p](rch[1,1](x,y), v))", ctx), d);
  });
  add("multichoice weights 2:3:5", [](std::string& d) {
    Context ctx = parse_context("vars: x, y, z");
    return detail::weights_are(normalize(ctx, parse_term("rch[2,8](x, rch[3,5](y,z))", ctx)), {"x", "y", "z"}, {{2, 3, 5}}, d);
  });
  add("multichoice weights 1:2", [](std::string& d) {
    Context ctx = parse_context("vars: y, z");
    return detail::weights_are(normalize(ctx, parse_term("rch[1,1](rch[2,1](y,z), z)", ctx)), {"y", "z"}, {{1, 2}}, d);
  });
  add("normal form with one shared binder", [](std::string& d) {
    Context ctx = parse_context("vars: y, z");
    NormalForm nf = normalize(ctx, parse_term("nu[1,1]p.pch[p](pch[p](y,z), z)", ctx));
    return detail::weights_are(nf, {"y", "z"}, {{1, 2}}, d) && nf.k == 0;
  });
  add("normal form with two binders", [](std::string& d) {
    Context ctx = parse_context("vars: y, z");
    return detail::weights_are(normalize(ctx, parse_term("nu[1,1]p.nu[1,1]q.pch[p](pch[q](y,z), z)", ctx)), {"y", "z"},
                               {{1, 3}}, d);
  });
  add("joined normal forms differ", [](std::string& d) {
    Context ctx = parse_context("vars: y, z");
    auto [a, b] = join_normalize(ctx, parse_term("nu[1,1]p.pch[p](pch[p](y,z),z)", ctx),
                                 parse_term("nu[1,1]p.nu[1,1]q.pch[p](pch[q](y,z),z)", ctx));
    std::string da, db;
    bool ok = detail::weights_are(a, {"y", "z"}, {{1, 2}}, da) && detail::weights_are(b, {"y", "z"}, {{1, 3}}, db);
    d = da + " vs " + db;
    return ok;
  });
  add("normal form reifies to a ratio choice", [](std::string& d) {
    Context ctx = parse_context("vars: y, z");
    return same(reify(normalize(ctx, parse_term("nu[1,1]p.pch[p](pch[p](y,z), z)", ctx))), parse_term("rch[1,2](y, z)", ctx), d);
  });
  add("normal form reifies to a tree diagram", [](std::string& d) {
    Context ctx = parse_context("params: p ; vars: v, x, y");
    return same(reify(normalize(ctx, parse_term("pch[p](pch[p](v,x), pch[p](y,v))", ctx))),
                parse_term("pch[p](pch[p](v, rch[1,1](x,y)), pch[p](rch[1,1](x,y), v))", ctx), d);
  });
  add("von Neumann fixed point", [](std::string& d) {
    Context ctx = parse_context("params: p ; vars: x, y");
    bool eq = decide(ctx, parse_term("rch[1,1](x,y)", ctx),
                     parse_term("pch[p](pch[p](rch[1,1](x,y), x), pch[p](y, rch[1,1](x,y)))", ctx))
                  .equal;
    d = eq ? "equal" : "not equal";
    return eq;
  });
  add("diagonal is not derivable", [](std::string& d) {
    Context ctx = parse_context("vars: x:2");
    bool eq = decide(ctx, parse_term("nu[1,1]p.x(p,p)", ctx), parse_term("nu[1,1]p.nu[1,1]q.x(p,q)", ctx)).equal;
    d = eq ? "equal" : "not equal";
    return !eq;
  });
  add("Bernstein partition of unity", [](std::string& d) {
    Poly s(1);
    for (std::size_t i = 0; i <= 3; ++i) s += bernstein(i, 3);
    d = s.to_string({"p"});
    return s == Poly::constant(1, 1);
  });
  auto interp_yz = [](const char* term, Rat want, std::string& d) {
    Context ctx = parse_context("vars: y, z");
    FuncArg a;
    a.functions.emplace("y", Poly::constant(0, 1));
    a.functions.emplace("z", Poly::constant(0, 0));
    Poly r = interpret(ctx, parse_term(term, ctx), a);
    d = r.to_string({});
    return r == Poly::constant(0, want);
  };
  add("fair choice is an average", [](std::string& d) {
    Context ctx = parse_context("vars: x, y");
    FuncArg a;
    a.functions.emplace("x", Poly::constant(0, 1));
    a.functions.emplace("y", Poly::constant(0, 0));
    Poly r = interpret(ctx, parse_term("rch[1,1](x,y)", ctx), a);
    d = r.to_string({});
    return r == Poly::constant(0, Rat(1, 2));
  });
  add("binder integrates", [](std::string& d) {
    Context ctx = parse_context("vars: x:1");
    FuncArg a;
    a.functions.emplace("x", Poly::variable(1, 0));
    Poly r = interpret(ctx, parse_term("nu[1,1]p.x(p)", ctx), a);
    d = r.to_string({});
    return r == Poly::constant(0, Rat(1, 2));
  });
  add("leaf mass with one shared binder", [=](std::string& d) {
    return interp_yz("nu[1,1]p.pch[p](pch[p](y,z),z)", Rat(1, 3), d);
  });
  add("leaf mass with two binders", [=](std::string& d) {
    return interp_yz("nu[1,1]p.nu[1,1]q.pch[p](pch[q](y,z),z)", Rat(1, 4), d);
  });
  add("normal form functional at (1,0,0)", [](std::string& d) {
    Context ctx = parse_context("vars: x, y, z");
    FuncArg a;
    a.functions.emplace("x", Poly::constant(0, 1));
    a.functions.emplace("y", Poly::constant(0, 0));
    a.functions.emplace("z", Poly::constant(0, 0));
    Poly r = interpret_normalform(normalize(ctx, parse_term("rch[2,8](x, rch[3,5](y,z))", ctx)), a);
    d = r.to_string({});
    return r == Poly::constant(0, Rat(2, 10));
  });
  add("ten chains independent at (1/3,2/3)", [](std::string& d) {
    Context ctx = parse_context("params: p, q ; vars: x:2");
    auto chains = ten_chains();
    std::size_t rank = chain_rank(ctx, chains, {Rat(1, 3), Rat(2, 3)}, 4);
    d = "rank " + std::to_string(rank);
    return chain_rank_check(ctx, chains, std::vector<Rat>{Rat(1, 3), Rat(2, 3)}, 4) && rank == 10;
  });
  add("term from a flat coefficient table", [](std::string& d) {
    Context ctx = parse_context("vars: x, y, z");
    Term t = term_from_bernstein(ctx, 0, {{Rat(2, 10), Rat(3, 10), Rat(5, 10)}});
    d = print(t);
    return decide(ctx, t, parse_term("rch[2,8](x, rch[3,5](y,z))", ctx)).equal;
  });
  add("term from a depth-two coefficient table", [](std::string& d) {
    Context ctx = parse_context("params: p ; vars: v, x, y");
    Term t = term_from_bernstein(ctx, 2, {{1, 0, 0}, {0, Rat(1, 2), Rat(1, 2)}, {1, 0, 0}});
    return same(t, parse_term("pch[p](pch[p](v, rch[1,1](x,y)), pch[p](rch[1,1](x,y), v))", ctx), d);
  });
  add("simulated frequencies 2:3:5", [](std::string& d) {
    Context ctx = parse_context("vars: x, y, z");
    Term t = parse_term("rch[2,8](x, rch[3,5](y,z))", ctx);
    Distribution want{{"x", Rat(2, 10)}, {"y", Rat(3, 10)}, {"z", Rat(5, 10)}};
    std::string a, b;
    bool ok = detail::simulates(ctx, t, want, Impl::polya, 11, a) && detail::simulates(ctx, t, want, Impl::betabern, 12, b);
    d = a + ", " + b;
    return ok;
  });
  add("urn and bias sampling agree", [](std::string& d) {
    Context ctx = parse_context("vars: y, z");
    Term t = parse_term("nu[1,1]p.pch[p](pch[p](y,z),z)", ctx);
    Distribution want{{"y", Rat(1, 3)}, {"z", Rat(2, 3)}};
    std::string a, b;
    bool ok = detail::simulates(ctx, t, want, Impl::polya, 13, a) && detail::simulates(ctx, t, want, Impl::betabern, 14, b);
    d = a + ", " + b;
    return ok && exact_distribution(ctx, t) == want;
  });
  add("simulated leaf mass with two binders", [](std::string& d) {
    Context ctx = parse_context("vars: y, z");
    Term t = parse_term("nu[1,1]p.nu[1,1]q.pch[p](pch[q](y,z),z)", ctx);
    Distribution want{{"y", Rat(1, 4)}, {"z", Rat(3, 4)}};
    std::string a, b;
    bool ok = detail::simulates(ctx, t, want, Impl::polya, 15, a) && detail::simulates(ctx, t, want, Impl::betabern, 16, b);
    d = a + ", " + b;
    return ok && exact_distribution(ctx, t) == want;
  });
  add("distinguishing context separates the simulations", [](std::string& d) {
    Context ctx = parse_context("vars: y, z");
    Term one = parse_term("nu[1,1]p.pch[p](pch[p](y,z),z)", ctx);
    Term two = parse_term("nu[1,1]p.nu[1,1]q.pch[p](pch[q](y,z),z)", ctx);
    auto e1 = exact_distribution(ctx, one), e2 = exact_distribution(ctx, two);
    bool ok = true;
    std::uint64_t seed = 17;
    for (Impl impl : {Impl::polya, Impl::betabern}) {
      ok = ok && compare_with(ctx, one, e1, 100000, seed++, impl).pass && compare_with(ctx, two, e2, 100000, seed++, impl).pass;
      ok = ok && !compare_with(ctx, one, e2, 100000, seed++, impl).pass && !compare_with(ctx, two, e1, 100000, seed++, impl).pass;
    }
    d = "exact " + to_string(e1.at("y")) + " vs " + to_string(e2.at("y"));
    return ok;
  });
  return out;
}

inline std::vector<ExampleResult> run_examples() {
  std::vector<ExampleResult> out;
  for (const auto& e : examples()) {
    ExampleResult r{e.name, false, ""};
    try {
      r.pass = e.check(r.detail);
    } catch (const std::exception& ex) {
      r.detail = std::string("exception: ") + ex.what();
    }
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace bb::suite
