#include "betabern/cli.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

#include <unistd.h>

namespace {

struct Result {
  int code;
  std::string out, err;
};

Result bbt(std::vector<std::string> args) {
  std::ostringstream out, err;
  int code = bb::cli::run(std::move(args), out, err);
  return {code, out.str(), err.str()};
}

std::string data(const std::string& name) { return std::string(BBT_DATA_DIR) + "/" + name; }

bool contains(const std::string& haystack, const std::string& needle) {
  return haystack.find(needle) != std::string::npos;
}

class TempFile {
 public:
  explicit TempFile(const std::string& content) {
    static int counter = 0;
    path_ = std::filesystem::temp_directory_path() /
            ("bbt_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++) + ".txt");
    std::ofstream(path_) << content;
  }
  ~TempFile() { std::filesystem::remove(path_); }
  std::string path() const { return path_.string(); }

 private:
  std::filesystem::path path_;
};

}  // namespace

TEST(Cli, NormalizePrintsTheGoldenForm) {
  auto r = bbt({"normalize", "--no-banner", "--context", "vars: y, z", "nu[1,1]p.pch[p](pch[p](y,z), z)"});
  EXPECT_EQ(r.code, 0);
  EXPECT_EQ(r.out.substr(0, r.out.find('\n')), "rch[1,2](y,z)");
}

TEST(Cli, DecideExitCodes) {
  auto differ = bbt({"decide", "--no-banner", "--context", "vars: x:2", "nu[1,1]p.x(p,p)", "nu[1,1]p.nu[1,1]q.x(p,q)"});
  EXPECT_EQ(differ.code, 1);
  EXPECT_TRUE(contains(differ.out, "not equal"));
  EXPECT_TRUE(contains(differ.out, "witness:"));

  auto same = bbt({"decide", "--no-banner", "-c", "params: p ; vars: x, y", "-t", "rch[1,1](x,y)", "-t",
                   "pch[p](pch[p](rch[1,1](x,y),x),pch[p](y,rch[1,1](x,y)))"});
  EXPECT_EQ(same.code, 0);
  EXPECT_EQ(same.out.substr(0, 6), "equal\n");

  EXPECT_EQ(bbt({"decide", "--no-banner", "--context", "vars: x", "x", "nu[1,0]p.x"}).code, 2);
  EXPECT_EQ(bbt({"decide", "--no-banner", "--context", "vars: x", "x"}).code, 2);
}

TEST(Cli, CheckReportsTheZeroHyperparameter) {
  auto r = bbt({"check", "--no-banner", "--context", "vars: x", "nu[1,0]p.x"});
  EXPECT_EQ(r.code, 65);
  EXPECT_TRUE(contains(r.out, "zero hyperparameter"));
  auto ok = bbt({"check", "--no-banner", "--context", "vars: x", "nu[1,2]p.x"});
  EXPECT_EQ(ok.code, 0);
  EXPECT_EQ(ok.out, "ok: nu[1,2]p.x\n");
}

TEST(Cli, ParseAndUsageErrors) {
  EXPECT_EQ(bbt({"normalize", "--context", "vars: x", "rch[1,1](x"}).code, 65);
  EXPECT_EQ(bbt({"normalize", "--context", "vars x", "x"}).code, 65);
  EXPECT_EQ(bbt({}).code, 64);
  EXPECT_EQ(bbt({"frobnicate"}).code, 64);
  EXPECT_EQ(bbt({"normalize", "--format", "xml", "x"}).code, 64);
  EXPECT_EQ(bbt({"normalize", "--context", "vars: x"}).code, 64);
  EXPECT_EQ(bbt({"simulate", "--context", "vars: x", "--impl", "gibbs", "x"}).code, 64);
  EXPECT_EQ(bbt({"--help"}).code, 0);
}

TEST(Cli, BannerIsSuppressible) {
  std::vector<std::string> args{"normalize", "--context", "vars: y", "y"};
  auto with = bbt(args);
  EXPECT_EQ(with.out.rfind(bb::cli::version, 0), 0u);
  args.push_back("--no-banner");
  auto without = bbt(args);
  EXPECT_FALSE(contains(without.out, bb::cli::version));
  EXPECT_EQ(with.out.substr(with.out.find('\n') + 1), without.out);
}

TEST(Cli, OutputIsByteStable) {
  std::vector<std::string> args{"simulate", "--no-banner", "--context", "vars: y, z", "--trials", "20000", "--seed",
                                "9", "nu[1,1]p.pch[p](pch[p](y,z), z)"};
  EXPECT_EQ(bbt(args).out, bbt(args).out);
  std::vector<std::string> decide{"decide", "--format", "structured", "--context", "vars: x:2", "nu[2,1]p.x(p,p)",
                                  "nu[1,1]p.x(p,p)"};
  EXPECT_EQ(bbt(decide).out, bbt(decide).out);
}

TEST(Cli, StructuredOutputIsJson) {
  auto r = bbt({"normalize", "--format", "structured", "--context", "params: p ; vars: y, z", "pch[p](y,rch[1,3](y,z))"});
  ASSERT_EQ(r.code, 0);
  auto j = nlohmann::json::parse(r.out);
  EXPECT_EQ(j["term"], "pch[p](y,rch[1,3](y,z))");
  EXPECT_EQ(j["k"], 1);

  auto d = bbt({"decide", "--format", "structured", "--context", "vars: x:2", "nu[1,1]p.x(p,p)",
                "nu[1,1]p.nu[1,1]q.x(p,q)"});
  auto v = nlohmann::json::parse(d.out);
  EXPECT_FALSE(v["equal"].get<bool>());
  EXPECT_TRUE(v.contains("witness"));
}

TEST(Cli, ContextAndTermsFromFiles) {
  TempFile ctx("# two sections on two lines\nparams: p\nvars: x:1, y\n");
  TempFile term("nu[1,1]a.\n  pch[p](x(a), y)\n");
  auto r = bbt({"check", "--no-banner", "--context", ctx.path(), "-t", term.path()});
  EXPECT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(r.out, "ok: nu[1,1]a.pch[p](x(a),y)\n");
}

TEST(Cli, EvalPrintsTheCanonicalPolynomial) {
  auto r = bbt({"eval", "--no-banner", "--context", "params: p ; vars: x:1, y", "pch[p](x(p), y)", "--arg",
                "f_x(a) = a^2", "--arg", "f_y = 1/2"});
  EXPECT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(r.out, "p^3 - 1/2*p + 1/2\n");
  auto binder = bbt({"eval", "--no-banner", "--context", "vars: x:2", "nu[1,1]p.nu[1,1]q.x(p,q)", "--arg",
                     "f_x(a,b) = a*b"});
  EXPECT_EQ(binder.out, "1/4\n");
  EXPECT_EQ(bbt({"eval", "--context", "vars: x:1", "nu[1,1]p.x(p)", "--arg", "f_x(a) = 1/a"}).code, 65);
  EXPECT_EQ(bbt({"eval", "--context", "vars: x:1, y", "nu[1,1]p.x(p)", "--arg", "f_x(a) = a"}).code, 65);
}

TEST(Cli, ReplayVerdicts) {
  auto good = bbt({"replay", "--no-banner", data("conjugacy_one_binder.deriv")});
  EXPECT_EQ(good.code, 0) << good.out << good.err;
  EXPECT_TRUE(contains(good.out, "result: rch[1,2](y,z)"));
  EXPECT_TRUE(contains(good.out, "derivation ok"));

  auto bad = bbt({"replay", "--no-banner", data("bad_side_condition.deriv")});
  EXPECT_EQ(bad.code, 1);
  EXPECT_TRUE(contains(bad.out, "side condition violated"));

  // the same steps aimed at a different end term
  auto wrong = bbt({"replay", "--no-banner", data("von_neumann.deriv"), "-t",
                    "pch[p](pch[p](rch[1,1](x,y),x),pch[p](y,rch[1,1](x,y)))", "-t", "rch[1,1](y,x)"});
  EXPECT_EQ(wrong.code, 1);
  EXPECT_EQ(bbt({"replay", "/nonexistent.deriv"}).code, 64);
}

TEST(Cli, SimulatePassesAndFailsCrossComparison) {
  std::vector<std::string> base{"simulate", "--no-banner", "--context", "vars: y, z", "--trials", "100000", "--seed",
                                "4", "nu[1,1]p.pch[p](pch[p](y,z), z)"};
  for (const char* impl : {"polya", "betabern"}) {
    auto args = base;
    args.insert(args.end(), {"--impl", impl});
    auto r = bbt(args);
    EXPECT_EQ(r.code, 0) << r.out;
    EXPECT_TRUE(contains(r.out, "pass        yes"));
    EXPECT_TRUE(contains(r.out, " 1/3\n"));
    args.insert(args.end(), {"--against", "nu[1,1]p.nu[1,1]q.pch[p](pch[q](y,z), z)"});
    EXPECT_EQ(bbt(args).code, 1);
  }
  EXPECT_EQ(bbt({"simulate", "--context", "params: p ; vars: y", "pch[p](y,y)"}).code, 65);
}

TEST(Cli, BatchDecideOverACorpus) {
  auto r = bbt({"decide", "--no-banner", "--corpus", data("corpus")});
  EXPECT_EQ(r.code, 0) << r.out;
  EXPECT_TRUE(contains(r.out, "reuse_vs_fresh.bbt: not equal\n"));
  EXPECT_TRUE(contains(r.out, "von_neumann.bbt: equal\n"));

  TempFile wrong("context vars: y, z\nleft rch[1,2](y,z)\nright rch[2,1](y,z)\nexpect equal\n");
  EXPECT_EQ(bbt({"decide", "--no-banner", "--corpus", wrong.path()}).code, 1);
  TempFile broken("context vars: y\nleft rch[1,2](y\nright y\n");
  EXPECT_EQ(bbt({"decide", "--no-banner", "--corpus", broken.path()}).code, 2);
}

TEST(Cli, ExamplesSuitePasses) {
  auto r = bbt({"paper-suite", "--no-banner", "--examples-only"});
  EXPECT_EQ(r.code, 0) << r.out;
  EXPECT_FALSE(contains(r.out, "FAIL"));
}
