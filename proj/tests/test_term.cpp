#include "betabern/syntax.hpp"
#include "betabern/term.hpp"

#include <gtest/gtest.h>

using namespace bb;

namespace {

Context ctx_of(const char* s) { return parse_context(s); }

ParseError::Kind parse_error_kind(const std::string& src, const Context& ctx) {
  try {
    parse_term(src, ctx);
  } catch (const ParseError& e) {
    return e.kind();
  }
  ADD_FAILURE() << "'" << src << "' parsed";
  return ParseError::Kind::lexical;
}

}  // namespace

TEST(Context, ParsesSectionsAndArities) {
  Context c = ctx_of("params: p, q ; vars: x:2, y, z:0");
  EXPECT_EQ(c.params, (std::vector<std::string>{"p", "q"}));
  ASSERT_EQ(c.vars.size(), 3u);
  EXPECT_EQ(c.vars[0].arity, 2u);
  EXPECT_EQ(c.vars[1].arity, 0u);
  EXPECT_EQ(print(c), "params: p, q ; vars: x:2, y:0, z:0");
}

TEST(Context, EitherSectionMayBeMissing) {
  EXPECT_TRUE(ctx_of("vars: x").params.empty());
  EXPECT_TRUE(ctx_of("params: p").vars.empty());
  EXPECT_TRUE(ctx_of("").vars.empty());
}

TEST(Context, RejectsDuplicatesAndJunk) {
  EXPECT_THROW(ctx_of("params: p, p"), ParseError);
  EXPECT_THROW(ctx_of("vars: x, x:1"), ParseError);
  EXPECT_THROW(ctx_of("params: p ; params: q"), ParseError);
  EXPECT_THROW(ctx_of("stuff: a"), ParseError);
}

TEST(Parser, RoundTripsThroughThePrinter) {
  Context c = ctx_of("params: p ; vars: x:2, y, z");
  for (const char* src : {"y", "rch[1,2](y,z)", "pch[p](y,z)", "nu[2,3]q.x(p,q)",
                          "nu[1,1]q.pch[q](rch[0,1](y,x(q,q)),nu[4,1]r.x(r,q))"}) {
    Term t = parse_term(src, c);
    EXPECT_EQ(print(t), src);
    EXPECT_TRUE(alpha_eq(parse_term(print(t), c), t));
  }
}

TEST(Parser, ToleratesWhitespaceAndParentheses) {
  Context c = ctx_of("vars: x:2");
  Term a = parse_term("nu[1,1]p.(nu[1,1]q.x(p,q))", c);
  Term b = parse_term("  nu[1,1] p . nu[1,1] q . x( p , q ) ", c);
  EXPECT_TRUE(alpha_eq(a, b));
}

TEST(Parser, ClassifiesErrors) {
  Context c = ctx_of("params: p ; vars: x:1, y");
  EXPECT_EQ(parse_error_kind("nu[1,0]q.y", c), ParseError::Kind::zero_hyperparameter);
  EXPECT_EQ(parse_error_kind("nu[0,2]q.y", c), ParseError::Kind::zero_hyperparameter);
  EXPECT_EQ(parse_error_kind("rch[0,0](y,y)", c), ParseError::Kind::zero_ratio);
  EXPECT_EQ(parse_error_kind("w", c), ParseError::Kind::unknown_identifier);
  EXPECT_EQ(parse_error_kind("pch[s](y,y)", c), ParseError::Kind::unknown_identifier);
  EXPECT_EQ(parse_error_kind("x(p,p)", c), ParseError::Kind::arity_mismatch);
  EXPECT_EQ(parse_error_kind("rch[1,1](y", c), ParseError::Kind::syntax);
  EXPECT_EQ(parse_error_kind("$y", c), ParseError::Kind::lexical);
}

TEST(Parser, ReportsTheOffendingOffset) {
  Context c = ctx_of("vars: y");
  try {
    parse_term("rch[1,1](y, w)", c);
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.offset(), 12u);
  }
}

TEST(Wellformed, ConstructorBuiltTermsAreChecked) {
  Context c = ctx_of("params: p ; vars: x:1");
  Term bad = Term::nu(1, 0, "q", Term::app("x", {"q"}));
  auto v = check_wellformed(c, bad);
  ASSERT_EQ(v.size(), 1u);
  EXPECT_NE(v[0].message.find("j=0"), std::string::npos);

  Term escaped = Term::ratio(1, 1, Term::app("x", {"p"}), Term::app("x", {"s"}));
  v = check_wellformed(c, escaped);
  ASSERT_EQ(v.size(), 1u);
  EXPECT_EQ(v[0].path, (Path{Branch::right}));

  EXPECT_TRUE(check_wellformed(c, parse_term("nu[1,1]q.pch[q](x(p),x(q))", c)).empty());
}

TEST(Term, TracksFreeParametersAndSize) {
  Context c = ctx_of("params: p, q ; vars: x:2");
  Term t = parse_term("pch[q](nu[1,1]r.x(r,p), x(p,p))", c);
  EXPECT_EQ(t.free_params(), (std::vector<std::string>{"p", "q"}));
  EXPECT_EQ(t.size(), 4u);
  EXPECT_TRUE(t.contains_nu());
}

TEST(Alpha, RenamingBindersPreservesEquality) {
  Context c = ctx_of("params: p ; vars: x:2");
  EXPECT_TRUE(alpha_eq(parse_term("nu[1,2]q.x(q,p)", c), parse_term("nu[1,2]r.x(r,p)", c)));
  EXPECT_FALSE(alpha_eq(parse_term("nu[1,2]q.x(q,p)", c), parse_term("nu[1,2]r.x(p,r)", c)));
  EXPECT_FALSE(alpha_eq(parse_term("nu[1,2]q.x(q,q)", c), parse_term("nu[2,1]q.x(q,q)", c)));
  // an inner binder shadowing an outer one
  EXPECT_TRUE(alpha_eq(parse_term("nu[1,1]q.nu[1,1]q.x(q,q)", c), parse_term("nu[1,1]a.nu[1,1]b.x(b,b)", c)));
}

TEST(Paths, ParseNavigateAndReplace) {
  EXPECT_EQ(parse_path("."), Path{});
  EXPECT_EQ(parse_path("root"), Path{});
  EXPECT_EQ(parse_path("l.b.r"), (Path{Branch::left, Branch::body, Branch::right}));
  EXPECT_EQ(parse_path("lbr"), (Path{Branch::left, Branch::body, Branch::right}));
  EXPECT_THROW(parse_path("l.x"), Error);

  Context c = ctx_of("vars: y, z");
  Term t = parse_term("rch[1,1](nu[1,1]p.pch[p](y,z), z)", c);
  EXPECT_EQ(print(subterm_at(t, parse_path("l.b.r"))), "z");
  EXPECT_EQ(binders_along(t, parse_path("l.b")), std::vector<std::string>{"p"});
  EXPECT_EQ(print(replace_at(t, parse_path("r"), parse_term("y", c))), "rch[1,1](nu[1,1]p.pch[p](y,z),y)");
  EXPECT_THROW(subterm_at(t, parse_path("r.l")), Error);
}

TEST(Substitution, InstantiatesFormalsAndAvoidsCapture) {
  Context c = ctx_of("params: p, q ; vars: x:2, y, z");
  Context yz = ctx_of("params: p, q ; vars: y, z");
  Term body = parse_term("nu[1,1]q.x(p,q)", c);
  Bindings b{{"x", {{"a", "b"}, parse_term("pch[b](pch[q](y,z),pch[a](y,z))", ctx_of("params: a, b, q ; vars: y, z"))}}};
  // the free q of the replacement must not be captured by the binder
  Term got = substitute(body, b);
  EXPECT_TRUE(alpha_eq(got, parse_term("nu[1,1]r.pch[r](pch[q](y,z),pch[p](y,z))", yz))) << print(got);
  EXPECT_TRUE(check_wellformed(yz, got).empty());
}
