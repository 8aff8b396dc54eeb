#include "betabern/axioms.hpp"
#include "betabern/semantics.hpp"
#include "betabern/suite/generators.hpp"

#include <gtest/gtest.h>

#include <fstream>
#include <sstream>

using namespace bb;

namespace {

const Context ctx = parse_context("params: p, q ; vars: f:1, g:2, w, x, y, z");

Term T(const std::string& s) { return parse_term(s, ctx); }

Term rewrite(const std::string& t, Axiom a, Direction d, const std::string& path = ".", Instantiation inst = {}) {
  return apply_axiom(T(t), {a, d, parse_path(path), std::move(inst)});
}

struct Case {
  Axiom axiom;
  std::string lhs, rhs;
  Instantiation back;  // what RL needs beyond the pattern
};

std::vector<Case> cases() {
  Instantiation zero, idem, d1, d2;
  zero.i = 3;
  zero.y = T("z");
  idem.i = 2;
  idem.j = 5;
  d1.p = "a";
  d1.i = 2;
  d1.j = 3;
  d2.p = "p";
  return {
      {Axiom::ConvexDistr, "rch[3,2](rch[1,2](w,x),rch[1,1](y,z))", "rch[2,3](rch[1,1](w,y),rch[2,1](x,z))", {}},
      {Axiom::ConvexSymm, "rch[1,2](y,z)", "rch[2,1](z,y)", {}},
      {Axiom::ConvexZero, "rch[3,0](y,z)", "y", zero},
      {Axiom::ConvexIdem, "rch[2,5](y,y)", "y", idem},
      {Axiom::C1, "pch[p](pch[q](w,x),pch[q](y,z))", "pch[q](pch[p](w,y),pch[p](x,z))", {}},
      {Axiom::C2, "nu[1,2]a.nu[3,4]b.g(a,b)", "nu[3,4]b.nu[1,2]a.g(a,b)", {}},
      {Axiom::C3, "nu[1,1]a.pch[q](f(a),y)", "pch[q](nu[1,1]a.f(a),nu[1,1]a.y)", {}},
      {Axiom::C4, "nu[1,1]a.rch[1,2](f(a),y)", "rch[1,2](nu[1,1]a.f(a),nu[1,1]a.y)", {}},
      {Axiom::C5, "pch[p](rch[1,2](w,x),rch[1,2](y,z))", "rch[1,2](pch[p](w,y),pch[p](x,z))", {}},
      {Axiom::D1, "nu[2,3]a.y", "y", d1},
      {Axiom::D2, "pch[p](y,y)", "y", d2},
      {Axiom::Conj, "nu[1,2]a.pch[a](y,z)", "rch[1,2](nu[2,2]a.y,nu[1,3]a.z)", {}},
  };
}

AxiomError::Kind failure_kind(const std::string& t, Axiom a, Direction d, Instantiation inst = {}) {
  try {
    rewrite(t, a, d, ".", std::move(inst));
  } catch (const AxiomError& e) {
    return e.kind();
  }
  ADD_FAILURE() << to_string(a) << " applied to " << t;
  return AxiomError::Kind::pattern_mismatch;
}

std::string slurp(const std::string& name) {
  std::ifstream in(std::string(BBT_DATA_DIR) + "/" + name);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

ReplayResult replay_file(const std::string& name) {
  DerivationFile d = parse_derivation(slurp(name));
  Context c = parse_context(*d.context);
  return replay(c, parse_term(*d.start, c), d.lines, parse_term(*d.end, c));
}

}  // namespace

TEST(Axioms, EachSchemeRewritesBothWays) {
  for (const auto& c : cases()) {
    SCOPED_TRACE(to_string(c.axiom));
    Term fwd = rewrite(c.lhs, c.axiom, Direction::lr);
    EXPECT_TRUE(alpha_eq(fwd, T(c.rhs))) << print(fwd);
    Term back = rewrite(c.rhs, c.axiom, Direction::rl, ".", c.back);
    EXPECT_TRUE(alpha_eq(back, T(c.lhs))) << print(back);
  }
}

TEST(Axioms, EachExampleIsSemanticallySound) {
  for (const auto& c : cases()) {
    SCOPED_TRACE(to_string(c.axiom));
    EXPECT_TRUE(functionally_equal(ctx, T(c.lhs), T(c.rhs)));
  }
}

TEST(Axioms, RewritesInsideContexts) {
  Term t = rewrite("rch[1,1](w,nu[1,1]a.pch[p](y,rch[1,2](y,z)))", Axiom::ConvexSymm, Direction::lr, "r.b.r");
  EXPECT_EQ(print(t), "rch[1,1](w,nu[1,1]a.pch[p](y,rch[2,1](z,y)))");
}

TEST(Axioms, RejectsPatternMismatches) {
  // inner weights must sum to the outer ones
  EXPECT_EQ(failure_kind("rch[3,2](rch[2,2](w,x),rch[1,1](y,z))", Axiom::ConvexDistr, Direction::lr),
            AxiomError::Kind::pattern_mismatch);
  EXPECT_EQ(failure_kind("rch[1,1](y,z)", Axiom::ConvexIdem, Direction::lr), AxiomError::Kind::pattern_mismatch);
  EXPECT_EQ(failure_kind("rch[1,2](y,z)", Axiom::ConvexZero, Direction::lr), AxiomError::Kind::pattern_mismatch);
  EXPECT_EQ(failure_kind("pch[p](rch[1,2](w,x),rch[2,1](y,z))", Axiom::C5, Direction::lr),
            AxiomError::Kind::pattern_mismatch);
}

TEST(Axioms, EnforcesSideConditions) {
  EXPECT_EQ(failure_kind("nu[1,1]a.f(a)", Axiom::D1, Direction::lr), AxiomError::Kind::side_condition);
  Instantiation captured;
  captured.p = "p";
  captured.i = 1;
  captured.j = 1;
  EXPECT_EQ(failure_kind("f(p)", Axiom::D1, Direction::rl, captured), AxiomError::Kind::side_condition);
}

TEST(Axioms, RightToLeftNeedsTheForgottenValues) {
  EXPECT_EQ(failure_kind("y", Axiom::ConvexZero, Direction::rl), AxiomError::Kind::missing_instantiation);
  EXPECT_EQ(failure_kind("y", Axiom::D2, Direction::rl), AxiomError::Kind::missing_instantiation);
  Instantiation wrong;
  wrong.i = 4;
  EXPECT_EQ(failure_kind("rch[3,0](y,z)", Axiom::ConvexZero, Direction::lr, wrong),
            AxiomError::Kind::instantiation_conflict);
}

TEST(Derivations, CheckDerivationAcceptsAValidChain) {
  std::vector<RewriteStep> steps{{Axiom::ConvexSymm, Direction::lr, {}, {}},
                                 {Axiom::ConvexSymm, Direction::lr, parse_path("r"), {}}};
  EXPECT_TRUE(check_derivation(ctx, T("rch[1,2](rch[1,3](w,x),y)"), steps, T("rch[2,1](y,rch[3,1](x,w))")));
  EXPECT_FALSE(check_derivation(ctx, T("rch[1,2](rch[1,3](w,x),y)"), steps, T("rch[1,2](rch[1,3](w,x),y)")));
}

TEST(Derivations, ScaleMacroDividesWeights) {
  Term t = T("rch[2,4](y,z)");
  auto steps = expand_macro(t, Macro::Scale, Direction::lr, {}, BigInt(2));
  EXPECT_EQ(print(t), "rch[1,2](y,z)");
  EXPECT_FALSE(steps.empty());
  Term u = T("rch[2,4](y,z)");
  for (const auto& s : steps) u = apply_axiom(u, s);
  EXPECT_TRUE(alpha_eq(u, T("rch[1,2](y,z)")));
}

TEST(Derivations, ParsesTheFileFormat) {
  auto d = parse_derivation("# comment\ncontext vars: y, z\nstart rch[1,2](y,z)\nend rch[2,1](z,y)\nConvexSymm LR . \n");
  EXPECT_EQ(*d.context, "vars: y, z");
  ASSERT_EQ(d.lines.size(), 1u);
  EXPECT_EQ(d.lines[0].name, "ConvexSymm");
  EXPECT_THROW(parse_derivation("Frobnicate LR ."), Error);
  EXPECT_THROW(parse_derivation("ConvexSymm sideways ."), Error);
}

TEST(Derivations, DataFilesReplay) {
  for (const char* name : {"conjugacy_one_binder.deriv", "conjugacy_two_binders.deriv", "von_neumann.deriv",
                           "ratio_commutativity.deriv"}) {
    SCOPED_TRACE(name);
    auto r = replay_file(name);
    EXPECT_TRUE(r.ok) << print(r.final_term);
    EXPECT_FALSE(r.steps.empty());
  }
}

TEST(Derivations, ReportsTheFailingStep) {
  try {
    replay_file("bad_side_condition.deriv");
    FAIL();
  } catch (const DerivationError& e) {
    EXPECT_EQ(e.index(), 0u);
    EXPECT_NE(std::string(e.what()).find("side condition"), std::string::npos);
  }
}

TEST(Derivations, EveryPrimitiveStepIsSound) {
  DerivationFile d = parse_derivation(slurp("von_neumann.deriv"));
  Context c = parse_context(*d.context);
  Term cur = parse_term(*d.start, c);
  for (const auto& s : replay(c, cur, d.lines, parse_term(*d.end, c)).steps) {
    Term next = apply_axiom(cur, s);
    EXPECT_TRUE(functionally_equal(c, cur, next)) << to_string(s);
    cur = next;
  }
}

TEST(Soundness, RandomInstancesOfEveryScheme) {
  suite::Rng rng(41);
  Context c = suite::axiom_context();
  for (Axiom a : all_axioms) {
    for (int n = 0; n < 8; ++n) {
      auto inst = suite::random_instantiation(rng, c, a);
      auto [lhs, rhs] = scheme_sides(a, inst);
      ASSERT_TRUE(check_wellformed(c, lhs).empty()) << print(lhs);
      EXPECT_TRUE(functionally_equal(c, lhs, rhs)) << to_string(a) << ": " << print(lhs) << " vs " << print(rhs);
    }
  }
}

TEST(Soundness, RandomRewritesPreserveMeaning) {
  suite::Rng rng(42);
  Context c = parse_context("params: p ; vars: x:1, y, z");
  suite::TermShape shape;
  shape.max_size = 10;
  int applied = 0;
  for (int n = 0; n < 30; ++n) {
    Term t = suite::random_term(rng, c, shape);
    auto step = suite::random_rewrite(rng, c, t);
    if (!step) continue;
    ++applied;
    EXPECT_TRUE(functionally_equal(c, t, step->result)) << to_string(step->step) << " on " << print(t);
  }
  EXPECT_GT(applied, 20);
}
