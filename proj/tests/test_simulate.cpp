#include "betabern/simulate.hpp"
#include "betabern/suite/generators.hpp"

#include <gtest/gtest.h>

using namespace bb;

namespace {

const Context ground = parse_context("vars: x, y, z");

Term G(const char* s) { return parse_term(s, ground); }

// Exact leaf distribution by enumerating every urn history.
struct UrnState {
  std::string name;
  BigInt t, f;
};

void enumerate(const Term& t, std::vector<UrnState> urns, const Rat& mass, Distribution& out) {
  switch (t.kind()) {
    case Kind::var_app:
      out[t.name()] += mass;
      return;
    case Kind::ratio: {
      Rat l(t.i(), t.i() + t.j());
      if (t.i() != 0) enumerate(t.left(), urns, mass * l, out);
      if (t.j() != 0) enumerate(t.right(), urns, mass * (1 - l), out);
      return;
    }
    case Kind::param_choice: {
      std::size_t k = urns.size();
      while (urns[--k].name != t.name()) {}
      Rat l(urns[k].t, urns[k].t + urns[k].f);
      auto left = urns, right = urns;
      left[k].t += 1;
      right[k].f += 1;
      enumerate(t.left(), left, mass * l, out);
      enumerate(t.right(), right, mass * (1 - l), out);
      return;
    }
    case Kind::nu:
      urns.push_back({t.name(), t.i(), t.j()});
      enumerate(t.body(), urns, mass, out);
      return;
  }
}

Distribution urn_oracle(const Term& t) {
  Distribution out;
  enumerate(t, {}, Rat(1), out);
  for (auto it = out.begin(); it != out.end();) it = it->second == 0 ? out.erase(it) : std::next(it);
  return out;
}

}  // namespace

TEST(Ground, DetectsOpenTerms) {
  Context open = parse_context("params: p ; vars: x:1, y");
  EXPECT_FALSE(ground_problems(open, parse_term("pch[p](y,y)", open)).empty());
  EXPECT_FALSE(ground_problems(open, parse_term("nu[1,1]a.x(a)", open)).empty());
  EXPECT_TRUE(ground_problems(ground, G("nu[1,1]a.pch[a](x,y)")).empty());
  EXPECT_THROW(estimate(open, parse_term("y", open), 10, 1, Impl::polya), Error);
}

TEST(Exact, MatchesHandComputedDistributions) {
  EXPECT_EQ(exact_distribution(ground, G("rch[1,3](x,y)")), (Distribution{{"x", Rat(1, 4)}, {"y", Rat(3, 4)}}));
  EXPECT_EQ(exact_distribution(ground, G("nu[1,1]p.pch[p](pch[p](y,z), z)")),
            (Distribution{{"y", Rat(1, 3)}, {"z", Rat(2, 3)}}));
  EXPECT_EQ(exact_distribution(ground, G("rch[1,0](x,y)")), (Distribution{{"x", Rat(1)}}));
}

TEST(Exact, AgreesWithUrnEnumeration) {
  suite::Rng rng(90);
  for (int n = 0; n < 40; ++n) {
    Term t = suite::random_ground_term(rng, 12);
    EXPECT_EQ(exact_distribution(ground, t), urn_oracle(t)) << print(t);
  }
}

TEST(Simulate, IsReproducibleFromTheSeed) {
  Term t = G("nu[2,1]p.rch[1,1](pch[p](x,y), pch[p](y,z))");
  for (Impl impl : {Impl::polya, Impl::betabern}) {
    EXPECT_EQ(estimate(ground, t, 5000, 7, impl), estimate(ground, t, 5000, 7, impl));
    EXPECT_NE(estimate(ground, t, 5000, 7, impl), estimate(ground, t, 5000, 8, impl));
  }
  auto a = stream_rng(1, 0), b = stream_rng(1, 1);
  EXPECT_NE(a(), b());
}

TEST(Simulate, CountsAddUpToTheTrials) {
  auto c = estimate(ground, G("rch[1,1](x,rch[1,1](y,z))"), 10001, 3, Impl::polya);
  std::uint64_t total = 0;
  for (const auto& [leaf, n] : c) total += n;
  EXPECT_EQ(total, 10001u);
}

TEST(ChiSquare, PerfectCountsPass) {
  Distribution d{{"x", Rat(1, 4)}, {"y", Rat(3, 4)}};
  auto r = chi_square_test({{"x", 250}, {"y", 750}}, d, 1000);
  EXPECT_TRUE(r.pass);
  EXPECT_EQ(r.chi_square, 0.0);
  EXPECT_EQ(r.dof, 1u);
  EXPECT_NEAR(r.threshold, 10.8276, 1e-3);  // 99.9% quantile of chi-square(1)
}

TEST(ChiSquare, SkewedCountsFail) {
  Distribution d{{"x", Rat(1, 2)}, {"y", Rat(1, 2)}};
  // (550-500)^2/500 * 2 = 10 < 10.83, (560-500)^2/500 * 2 = 14.4 > 10.83
  EXPECT_TRUE(chi_square_test({{"x", 550}, {"y", 450}}, d, 1000).pass);
  EXPECT_FALSE(chi_square_test({{"x", 560}, {"y", 440}}, d, 1000).pass);
}

TEST(ChiSquare, ImpossibleLeafFails) {
  auto r = chi_square_test({{"x", 999}, {"z", 1}}, {{"x", Rat(1)}}, 1000);
  EXPECT_FALSE(r.pass);
}

TEST(ChiSquare, SmallCellsAreMerged) {
  // expected counts 1, 1 and 98: the two small cells pool into one
  Distribution d{{"x", Rat(1, 100)}, {"y", Rat(1, 100)}, {"z", Rat(98, 100)}};
  auto r = chi_square_test({{"x", 2}, {"z", 98}}, d, 100);
  EXPECT_EQ(r.dof, 0u);
  EXPECT_TRUE(r.pass);
}

TEST(Compare, BothSimulatorsMatchTheExactDistribution) {
  for (const char* s : {"nu[1,1]p.pch[p](pch[p](y,z), z)", "nu[1,1]p.nu[1,1]q.pch[p](pch[q](y,z), z)",
                        "nu[3,2]p.rch[2,1](pch[p](x,pch[p](y,z)), pch[p](z,x))"}) {
    for (Impl impl : {Impl::polya, Impl::betabern}) {
      auto r = compare(ground, G(s), 40000, 11, impl);
      EXPECT_TRUE(r.pass) << s << " with " << to_string(impl) << ": chi2 " << r.chi_square;
    }
  }
}

TEST(Compare, CrossComparisonSeparatesTheDistinguishingPair) {
  Term same = G("nu[1,1]p.pch[p](pch[p](y,z), z)"), fresh = G("nu[1,1]p.nu[1,1]q.pch[p](pch[q](y,z), z)");
  for (Impl impl : {Impl::polya, Impl::betabern}) {
    EXPECT_FALSE(compare_with(ground, same, exact_distribution(ground, fresh), 100000, 5, impl).pass);
    EXPECT_FALSE(compare_with(ground, fresh, exact_distribution(ground, same), 100000, 6, impl).pass);
  }
}

TEST(Report, TextHasMachineReadableLeafLines) {
  auto r = compare(ground, G("rch[1,3](x,y)"), 1000, 1, Impl::betabern);
  std::string text = to_text(r);
  EXPECT_NE(text.find("impl        betabern\n"), std::string::npos);
  EXPECT_NE(text.find("leaf x " + std::to_string(r.counts["x"]) + " 1/4\n"), std::string::npos);
  EXPECT_NE(text.find("leaf y " + std::to_string(r.counts["y"]) + " 3/4\n"), std::string::npos);
}

TEST(Impl, ParsesNames) {
  EXPECT_EQ(parse_impl("polya"), Impl::polya);
  EXPECT_EQ(parse_impl("betabern"), Impl::betabern);
  EXPECT_THROW(parse_impl("gibbs"), Error);
}
