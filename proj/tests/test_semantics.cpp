#include "betabern/coeff.hpp"
#include "betabern/funcarg.hpp"
#include "betabern/normalizer.hpp"
#include "betabern/semantics.hpp"
#include "betabern/suite/examples.hpp"

#include <gtest/gtest.h>

#include <limits>

using namespace bb;

namespace {

Poly eval_with(const char* ctx, const char* term, std::vector<std::string> defs) {
  Context c = parse_context(ctx);
  return interpret(c, parse_term(term, c), parse_function_arguments(defs, c));
}

Rat constant_of(const Poly& p) {
  EXPECT_LE(p.term_count(), 1u);
  return p.coefficient(Exponents(p.nvars(), 0));
}

}  // namespace

TEST(Coeff, StaysExactPastMachineIntegers) {
  const std::int64_t big = std::numeric_limits<std::int64_t>::max();
  Coeff c(big);
  c += Coeff(big);
  EXPECT_EQ(c.rat(), Rat(BigInt(big) * 2));
  c -= Coeff(big);
  EXPECT_EQ(c, Coeff(big));
  Coeff f(Rat(BigInt(1), BigInt(big)));
  f *= Coeff(Rat(BigInt(1), BigInt(big)));
  EXPECT_EQ(f.rat(), Rat(BigInt(1), BigInt(big) * big));
  EXPECT_EQ(-Coeff(Rat(3, 4)), Coeff(Rat(-3, 4)));
  EXPECT_TRUE((Coeff(Rat(1, 3)) -= Coeff(Rat(1, 3))).is_zero());
}

TEST(Poly, ArithmeticAgreesWithPointEvaluation) {
  Poly a = Poly::variable(2, 0) * Rat(3) + Poly::constant(2, Rat(1, 2));
  Poly b = Poly::variable(2, 1) - Poly::variable(2, 0) * Poly::variable(2, 1);
  std::vector<std::vector<Rat>> points{{Rat(1, 2), Rat(2, 3)}, {Rat(-3), Rat(5, 7)}, {Rat(0), Rat(1)}};
  for (const auto& pt : points) {
    EXPECT_EQ((a + b).evaluate(pt), a.evaluate(pt) + b.evaluate(pt));
    EXPECT_EQ((a - b).evaluate(pt), a.evaluate(pt) - b.evaluate(pt));
    EXPECT_EQ((a * b).evaluate(pt), a.evaluate(pt) * b.evaluate(pt));
    EXPECT_EQ(b.times_variable(0).evaluate(pt), b.evaluate(pt) * pt[0]);
  }
  EXPECT_TRUE((a - a).is_zero());
  EXPECT_EQ(b.degree_in(0), 1u);
}

TEST(Poly, PrintsInCanonicalOrder) {
  Poly p = Poly::variable(2, 1) * Rat(-1, 2) + Poly::variable(2, 0) * Poly::variable(2, 0) + Poly::constant(2, 4);
  EXPECT_EQ(p.to_string({"p", "q"}), "p^2 - 1/2*q + 4");
  EXPECT_EQ(Poly(2).to_string({"p", "q"}), "0");
}

TEST(Poly, FromTermsCombinesDuplicates) {
  Poly p = Poly::from_terms(1, {1, 0, 1}, {Rat(1, 2), Rat(2), Rat(-1, 2)});
  EXPECT_EQ(p, Poly::constant(1, 2));
}

TEST(FunctionArguments, ParsesPolynomials) {
  Context c = parse_context("vars: x:2, y");
  auto [name, p] = parse_function_argument("f_x(a,b) = (a + b)^2/2 - 1", c);
  EXPECT_EQ(name, "x");
  Poly a = Poly::variable(2, 0), b = Poly::variable(2, 1);
  EXPECT_EQ(p, (a + b) * (a + b) * Rat(1, 2) - Poly::constant(2, 1));
  EXPECT_EQ(parse_function_argument("y = -3/4", c).second, Poly::constant(0, Rat(-3, 4)));
}

TEST(FunctionArguments, RejectsBadDefinitions) {
  Context c = parse_context("vars: x:1, y");
  EXPECT_THROW(parse_function_argument("f_x(a) = 1/a", c), ParseError);
  EXPECT_THROW(parse_function_argument("f_x(a) = b", c), ParseError);
  EXPECT_THROW(parse_function_argument("f_x(a,b) = a", c), ParseError);
  EXPECT_THROW(parse_function_argument("f_w = 1", c), ParseError);
  EXPECT_THROW(parse_function_argument("f_x(a) = a +", c), ParseError);
  EXPECT_THROW(parse_function_arguments({"f_x(a) = a", "f_x(b) = b", "f_y = 1"}, c), Error);
  EXPECT_THROW(parse_function_arguments({"f_x(a) = a"}, c), Error);
}

TEST(Interpret, RatioAndParameterChoices) {
  EXPECT_EQ(constant_of(eval_with("vars: x, y", "rch[1,2](x,y)", {"f_x = 1", "f_y = 0"})), Rat(1, 3));
  Poly p = eval_with("params: p ; vars: x, y", "pch[p](x,y)", {"f_x = 1", "f_y = 0"});
  EXPECT_EQ(p, Poly::variable(1, 0));
  Poly q = eval_with("params: p ; vars: x:1", "pch[p](x(p),x(p))", {"f_x(a) = a^2"});
  EXPECT_EQ(q, Poly::variable(1, 0) * Poly::variable(1, 0));
}

TEST(Interpret, BindersIntegrateAgainstBeta) {
  // E[a] = i/(i+j), E[a^2] = i(i+1)/((i+j)(i+j+1))
  EXPECT_EQ(constant_of(eval_with("vars: x:1", "nu[2,3]a.x(a)", {"f_x(a) = a"})), Rat(2, 5));
  EXPECT_EQ(constant_of(eval_with("vars: x:1", "nu[2,3]a.x(a)", {"f_x(a) = a^2"})), Rat(6, 30));
  EXPECT_EQ(constant_of(eval_with("vars: x:2", "nu[1,1]a.x(a,a)", {"f_x(a,b) = a*b"})), Rat(1, 3));
  EXPECT_EQ(constant_of(eval_with("vars: x:2", "nu[1,1]a.nu[1,1]b.x(a,b)", {"f_x(a,b) = a*b"})), Rat(1, 4));
  EXPECT_EQ(constant_of(eval_with("vars: y, z", "nu[1,1]p.pch[p](pch[p](y,z), z)", {"f_y = 1", "f_z = 0"})),
            Rat(1, 3));
}

TEST(Interpret, FreeParameterSurvivesUnderABinder) {
  Poly p = eval_with("params: p ; vars: x:2", "nu[1,1]a.x(a,p)", {"f_x(a,b) = a*b + b"});
  EXPECT_EQ(p, Poly::variable(1, 0) * Rat(3, 2));
}

TEST(Interpret, NormalFormHasTheSameMeaning) {
  Context c = parse_context("params: p ; vars: x:2, y");
  Term t = parse_term("nu[1,2]a.pch[p](x(a,p), rch[1,2](y, nu[2,1]b.x(b,a)))", c);
  FuncArg args = parse_function_arguments({"f_x(a,b) = a^2*b - 1/3", "f_y = 2"}, c);
  EXPECT_EQ(interpret_normalform(normalize(c, t), args), interpret(c, t, args));
}

TEST(Oracle, SeparatesReuseFromFreshDraws) {
  Context c = parse_context("vars: x:2");
  Term same = parse_term("nu[1,1]p.x(p,p)", c), fresh = parse_term("nu[1,1]p.nu[1,1]q.x(p,q)", c);
  EXPECT_FALSE(functionally_equal(c, same, fresh));
  // linear arguments cannot tell them apart
  FuncArg linear = parse_function_arguments({"f_x(a,b) = a + 2*b"}, c);
  EXPECT_EQ(interpret(c, same, linear), interpret(c, fresh, linear));
}

TEST(Oracle, AcceptsDerivablyEqualTerms) {
  Context c = parse_context("params: p ; vars: x, y");
  EXPECT_TRUE(functionally_equal(c, parse_term("rch[1,1](x,y)", c),
                                 parse_term("pch[p](pch[p](rch[1,1](x,y),x),pch[p](y,rch[1,1](x,y)))", c)));
}

TEST(Rank, MatrixRankOfKnownMatrices) {
  EXPECT_EQ(matrix_rank({{1, 2}, {2, 4}}), 1u);
  EXPECT_EQ(matrix_rank({{0, 1, 0}, {1, 0, 0}, {1, 1, 0}}), 2u);
  EXPECT_EQ(matrix_rank({{Rat(1, 2), 0}, {0, Rat(1, 3)}}), 2u);
  EXPECT_EQ(monomials_up_to(2, 2).size(), 6u);
}

TEST(Rank, TenChainsAreIndependentAtDistinctPoints) {
  Context c = parse_context("params: p1, p2 ; vars: x:2");
  auto chains = suite::ten_chains();
  ASSERT_EQ(chains.size(), 10u);
  EXPECT_EQ(chain_rank(c, chains, {Rat(1, 2), Rat(1, 3)}, 4), 10u);
  EXPECT_TRUE(chain_rank_check(c, chains, std::vector<Rat>{Rat(1, 2), Rat(1, 3)}, 4));
  EXPECT_LT(chain_rank(c, chains, {Rat(1, 2), Rat(1, 2)}, 4), 10u);
  EXPECT_THROW(chain_rank_check(c, chains, std::vector<Rat>{Rat(1, 2), Rat(1, 2)}, 4), Error);
}
