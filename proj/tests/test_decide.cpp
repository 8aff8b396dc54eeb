#include "betabern/decide.hpp"
#include "betabern/semantics.hpp"
#include "betabern/suite/generators.hpp"

#include <gtest/gtest.h>

using namespace bb;

namespace {

Verdict decide_text(const char* ctx, const char* t, const char* u) {
  Context c = parse_context(ctx);
  return decide(c, parse_term(t, c), parse_term(u, c));
}

const char* von_neumann = "pch[p](pch[p](rch[1,1](x,y),x),pch[p](y,rch[1,1](x,y)))";

}  // namespace

TEST(Decide, FairCoinIsAFixedPointOfVonNeumannsTrick) {
  EXPECT_TRUE(decide_text("params: p ; vars: x, y", "rch[1,1](x,y)", von_neumann).equal);
}

TEST(Decide, BiasedCoinIsNotAFixedPoint) {
  EXPECT_FALSE(decide_text("params: p ; vars: x, y", "rch[1,2](x,y)",
                           "pch[p](pch[p](rch[1,2](x,y),x),pch[p](y,rch[1,2](x,y)))")
                   .equal);
}

TEST(Decide, ReusedDrawDiffersFromFreshDraws) {
  Verdict v = decide_text("vars: x:2", "nu[1,1]p.x(p,p)", "nu[1,1]p.nu[1,1]q.x(p,q)");
  EXPECT_FALSE(v.equal);
  ASSERT_TRUE(v.witness.has_value());
  EXPECT_NE(v.witness->left_row, v.witness->right_row);
  EXPECT_EQ(v.witness->left_row[v.witness->column] == 0, v.witness->right_row[v.witness->column] != 0);
  EXPECT_NE(to_text(v).find("witness:"), std::string::npos);
  EXPECT_TRUE(to_json(v).contains("witness"));
}

TEST(Decide, EqualVerdictHasNoWitness) {
  Verdict v = decide_text("vars: y, z", "nu[1,1]p.pch[p](pch[p](y,z), z)", "rch[1,2](y,z)");
  EXPECT_TRUE(v.equal);
  EXPECT_FALSE(v.witness.has_value());
  EXPECT_EQ(v.normal_forms.first, v.normal_forms.second);
  EXPECT_FALSE(to_json(v).contains("witness"));
}

TEST(Decide, ExchangeabilityOfDraws) {
  EXPECT_TRUE(decide_text("vars: x:2", "nu[2,3]p.nu[1,1]q.x(p,q)", "nu[1,1]q.nu[2,3]p.x(p,q)").equal);
  EXPECT_FALSE(decide_text("vars: x:2", "nu[2,3]p.nu[1,1]q.x(p,q)", "nu[2,3]p.nu[1,1]q.x(q,p)").equal);
}

TEST(Decide, BinderLevelsAreJoined) {
  // Beta(1,1) is the even mixture of Beta(2,1) and Beta(1,2)
  EXPECT_TRUE(decide_text("vars: x:1", "nu[1,1]p.x(p)", "rch[1,1](nu[2,1]p.x(p),nu[1,2]p.x(p))").equal);
  EXPECT_FALSE(decide_text("vars: x:1", "nu[1,1]p.x(p)", "rch[1,2](nu[2,1]p.x(p),nu[1,2]p.x(p))").equal);
}

TEST(Decide, DepthsAreJoined) {
  EXPECT_TRUE(decide_text("params: p ; vars: y", "pch[p](y,y)", "y").equal);
  EXPECT_TRUE(decide_text("params: p, q ; vars: y, z", "pch[p](pch[q](y,z),pch[q](y,z))", "pch[q](y,z)").equal);
}

TEST(Decide, FreeParametersAreNotExchangeable) {
  EXPECT_FALSE(decide_text("params: p, q ; vars: y, z", "pch[p](y,z)", "pch[q](y,z)").equal);
}

TEST(Decide, IsSymmetric) {
  suite::Rng rng(3);
  for (int n = 0; n < 20; ++n) {
    Context c = suite::random_context(rng);
    suite::TermShape shape;
    shape.max_size = 6;
    Term t = suite::random_term(rng, c, shape), u = suite::random_term(rng, c, shape);
    EXPECT_EQ(decide(c, t, u).equal, decide(c, u, t).equal) << print(t) << " vs " << print(u);
  }
}

TEST(Decide, RewriteChainsStayEqual) {
  suite::Rng rng(16);
  for (int n = 0; n < 25; ++n) {
    Context c = suite::random_context(rng);
    Term start = suite::random_term(rng, c), cur = start;
    for (int s = 0; s < 5; ++s)
      if (auto step = suite::random_rewrite(rng, c, cur)) cur = step->result;
    EXPECT_TRUE(decide(c, start, cur).equal) << print(start) << " vs " << print(cur);
  }
}

TEST(Decide, AgreesWithTheSemanticOracle) {
  suite::Rng rng(17);
  int equal = 0;
  for (int n = 0; n < 40; ++n) {
    Context c = suite::random_context(rng, 1, 2, 1);
    suite::TermShape shape;
    shape.max_size = 4;
    Term t = suite::random_term(rng, c, shape), u = suite::random_term(rng, c, shape);
    bool o = functionally_equal(c, t, u);
    equal += o;
    EXPECT_EQ(decide(c, t, u).equal, o) << print(t) << " vs " << print(u);
  }
  EXPECT_GT(equal, 0);
}
