#pragma once

#include "betabern/betabern.hpp"
#include "betabern/suite/criteria.hpp"
#include "betabern/suite/examples.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

namespace bb::cli {

// sysexits-style codes
inline constexpr int ok = 0;
inline constexpr int usage_error = 64;
inline constexpr int data_error = 65;
inline constexpr int internal_error = 70;

inline constexpr const char* version = "bbt 1.0.0";

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace detail {

inline std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p);
  if (!in) throw UsageError("cannot read '" + p.string() + "'");
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

inline std::string trim(const std::string& s) {
  auto b = s.find_first_not_of(" \t\r\n"), e = s.find_last_not_of(" \t\r\n");
  return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
}

// Non-comment, non-blank lines of a file.
inline std::vector<std::string> content_lines(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    line = trim(line.substr(0, line.find('#')));
    if (!line.empty()) out.push_back(line);
  }
  return out;
}

inline bool is_file(const std::string& s) {
  std::error_code ec;
  return s.find('\n') == std::string::npos && std::filesystem::is_regular_file(s, ec);
}

// A context is inline text or a file whose lines are its sections.
inline Context load_context(const std::string& src) {
  if (!is_file(src)) return parse_context(src);
  std::string joined;
  for (const auto& l : content_lines(read_file(src))) joined += (joined.empty() ? "" : " ; ") + l;
  return parse_context(joined);
}

// A term is inline text or a file holding one term (possibly spread over lines).
inline std::string term_text(const std::string& src) {
  if (!is_file(src)) return src;
  std::string joined;
  for (const auto& l : content_lines(read_file(src))) joined += (joined.empty() ? "" : " ") + l;
  return joined;
}

inline std::string describe(const ParseError& e) { return std::string(to_string(e.kind())) + " " + e.what(); }

struct Corpus {
  std::string context, left, right;
  std::optional<bool> expect;
};

inline Corpus parse_corpus_file(const std::string& text) {
  Corpus c;
  for (const auto& l : content_lines(text)) {
    auto sp = l.find_first_of(" \t");
    std::string key = l.substr(0, sp), value = sp == std::string::npos ? "" : trim(l.substr(sp));
    if (key == "context") c.context = value;
    else if (key == "left") c.left = value;
    else if (key == "right") c.right = value;
    else if (key == "expect") {
      if (value != "equal" && value != "different") throw Error("expect must be 'equal' or 'different'");
      c.expect = value == "equal";
    } else {
      throw Error("unknown key '" + key + "'");
    }
  }
  if (c.left.empty() || c.right.empty()) throw Error("a corpus file needs 'left' and 'right' lines");
  return c;
}

struct Options {
  std::string context;
  bool have_context = false;
  std::vector<std::string> terms;
  std::string format = "text";
  bool no_banner = false;
  std::uint64_t trials = 100000;
  std::uint64_t seed = 1;
  std::string impl = "polya";
  std::vector<std::string> args;
  std::string corpus;
  std::string against;
  bool examples_only = false;

  bool structured() const { return format == "structured"; }
};

class Runner {
 public:
  Runner(Options o, std::ostream& out, std::ostream& err) : o_(std::move(o)), out_(out), err_(err) {}

  Context context() const { return o_.have_context ? load_context(o_.context) : Context{}; }

  std::vector<Term> terms(const Context& ctx, std::size_t want) const {
    if (want && o_.terms.size() != want)
      throw UsageError("expected " + std::to_string(want) + " term(s), got " + std::to_string(o_.terms.size()));
    if (o_.terms.empty()) throw UsageError("no term given");
    std::vector<Term> out;
    for (const auto& t : o_.terms) out.push_back(parse_term(term_text(t), ctx));
    return out;
  }

  void emit(const nlohmann::json& j) { out_ << j.dump(2) << "\n"; }

  int check() {
    Context ctx = context();
    if (o_.terms.empty()) throw UsageError("no term given");
    bool clean = true;
    nlohmann::json results = nlohmann::json::array();
    for (std::size_t n = 0; n < o_.terms.size(); ++n) {
      nlohmann::json r;
      std::vector<std::string> problems;
      try {
        Term t = parse_term(term_text(o_.terms[n]), ctx);
        for (const auto& v : check_wellformed(ctx, t)) problems.push_back(to_string(v.path) + ": " + v.message);
        r["term"] = print(t);
      } catch (const ParseError& e) {
        problems.push_back(describe(e));
        r["error"] = {{"kind", to_string(e.kind())}, {"offset", e.offset()}, {"message", e.what()}};
      }
      clean = clean && problems.empty();
      r["wellformed"] = problems.empty();
      r["problems"] = problems;
      results.push_back(r);
      if (!o_.structured()) {
        if (problems.empty()) out_ << "ok: " << r["term"].get<std::string>() << "\n";
        for (const auto& p : problems) out_ << "error: " << p << "\n";
      }
    }
    if (o_.structured()) emit(results.size() == 1 ? results[0] : results);
    return clean ? ok : data_error;
  }

  int normalize() {
    Context ctx = context();
    nlohmann::json all = nlohmann::json::array();
    for (const auto& t : terms(ctx, 0)) {
      NormalForm nf = bb::normalize(ctx, t);
      std::string reified = print(reify(nf));
      if (o_.structured()) {
        auto j = to_json(nf);
        j["term"] = reified;
        all.push_back(j);
      } else {
        out_ << reified << "\n" << to_text(nf);
      }
    }
    if (o_.structured()) emit(all.size() == 1 ? all[0] : all);
    return ok;
  }

  int decide_pair() {
    Context ctx = context();
    auto ts = terms(ctx, 2);
    Verdict v = bb::decide(ctx, ts[0], ts[1]);
    if (o_.structured()) emit(to_json(v));
    else out_ << to_text(v);
    return v.equal ? 0 : 1;
  }

  int decide_corpus(const std::string& where) {
    std::vector<std::filesystem::path> files;
    if (std::filesystem::is_directory(where)) {
      for (const auto& e : std::filesystem::directory_iterator(where))
        if (e.is_regular_file() && e.path().extension() == ".bbt") files.push_back(e.path());
      std::sort(files.begin(), files.end());
    } else {
      files.push_back(where);
    }
    if (files.empty()) throw UsageError("no .bbt files in '" + where + "'");
    int status = 0;
    nlohmann::json all = nlohmann::json::array();
    for (const auto& f : files) {
      nlohmann::json r{{"file", f.filename().string()}};
      std::string line;
      try {
        Corpus c = parse_corpus_file(read_file(f));
        Context ctx = parse_context(c.context);
        Verdict v = bb::decide(ctx, parse_term(c.left, ctx), parse_term(c.right, ctx));
        bool expected = v.equal == c.expect.value_or(true);
        r["equal"] = v.equal;
        r["expected"] = expected;
        line = std::string(v.equal ? "equal" : "not equal") + (expected ? "" : "  (unexpected)");
        if (!expected) status = std::max(status, 1);
      } catch (const std::exception& e) {
        r["error"] = e.what();
        line = std::string("error: ") + e.what();
        status = 2;
      }
      all.push_back(r);
      if (!o_.structured()) out_ << f.filename().string() << ": " << line << "\n";
    }
    if (o_.structured()) emit(all);
    return status;
  }

  int eval() {
    Context ctx = context();
    Term t = terms(ctx, 1)[0];
    FuncArg args = parse_function_arguments(o_.args, ctx);
    Poly p = interpret(ctx, t, args);
    std::string text = p.to_string(ctx.params);
    if (o_.structured()) {
      nlohmann::json monomials = nlohmann::json::array();
      for (const auto& [e, c] : p.terms()) monomials.push_back({{"exponents", e}, {"coefficient", to_string(c)}});
      emit({{"params", ctx.params}, {"polynomial", text}, {"monomials", monomials}});
    } else {
      out_ << text << "\n";
    }
    return ok;
  }

  int replay(const std::string& file) {
    DerivationFile d = parse_derivation(read_file(file));
    if (!o_.have_context && !d.context) throw UsageError("derivation has no context and none was given");
    Context ctx = o_.have_context ? context() : parse_context(*d.context);
    std::string start = d.start.value_or(""), end = d.end.value_or("");
    if (!o_.terms.empty()) {
      if (o_.terms.size() != 2) throw UsageError("give both the start and end terms");
      start = term_text(o_.terms[0]);
      end = term_text(o_.terms[1]);
    }
    if (start.empty() || end.empty()) throw UsageError("derivation has no start or end term");
    Term s = parse_term(start, ctx), e = parse_term(end, ctx);
    nlohmann::json j{{"start", print(s)}, {"end", print(e)}};
    int status = ok;
    try {
      ReplayResult r = bb::replay(ctx, s, d.lines, e);
      nlohmann::json steps = nlohmann::json::array();
      for (const auto& st : r.steps) steps.push_back(to_string(st));
      j["steps"] = steps;
      j["result"] = print(r.final_term);
      j["derivable"] = r.ok;
      if (!o_.structured()) {
        for (std::size_t k = 0; k < r.steps.size(); ++k) out_ << std::setw(4) << (k + 1) << "  " << to_string(r.steps[k]) << "\n";
        out_ << "result: " << print(r.final_term) << "\n";
        out_ << (r.ok ? "derivation ok: reaches the end term" : "derivation fails: the result differs from the end term") << "\n";
      }
      status = r.ok ? ok : 1;
    } catch (const DerivationError& ex) {
      j["derivable"] = false;
      j["error"] = ex.what();
      if (!o_.structured()) out_ << "derivation fails: " << ex.what() << "\n";
      status = 1;
    }
    if (o_.structured()) emit(j);
    return status;
  }

  int simulate() {
    Context ctx = context();
    Term t = terms(ctx, 1)[0];
    Impl impl = parse_impl(o_.impl);
    Distribution expected = o_.against.empty() ? exact_distribution(ctx, t)
                                               : exact_distribution(ctx, parse_term(term_text(o_.against), ctx));
    TrialReport r = compare_with(ctx, t, expected, o_.trials, o_.seed, impl);
    if (o_.structured()) {
      nlohmann::json leaves = nlohmann::json::object();
      std::set<std::string> names;
      for (const auto& [n, c] : r.counts) names.insert(n);
      for (const auto& [n, p] : r.expected) names.insert(n);
      for (const auto& n : names)
        leaves[n] = {{"count", r.counts.count(n) ? r.counts.at(n) : 0},
                     {"expected", to_string(r.expected.count(n) ? r.expected.at(n) : Rat(0))}};
      emit({{"impl", to_string(r.impl)}, {"trials", r.trials}, {"seed", r.seed}, {"leaves", leaves},
            {"chi_square", r.chi_square}, {"dof", r.dof}, {"threshold", r.threshold}, {"pass", r.pass}});
    } else {
      out_ << to_text(r);
    }
    return r.pass ? ok : 1;
  }

  int run_suite();

 private:
  Options o_;
  std::ostream& out_;
  std::ostream& err_;
};

}  // namespace detail

inline int run(std::vector<std::string> args, std::ostream& out, std::ostream& err);

namespace detail {

struct CliExample {
  std::string name;
  std::vector<std::string> args;
  int exit_code;
  std::string expect_in_output;
};

inline std::vector<CliExample> cli_examples() {
  return {
      {"decide on the distinguishing pair exits 1 with a witness",
       {"decide", "--no-banner", "--context", "vars: x:2", "nu[1,1]p.x(p,p)", "nu[1,1]p.nu[1,1]q.x(p,q)"}, 1,
       "witness:"},
      {"normalize prints the one-binder golden normal form",
       {"normalize", "--no-banner", "--context", "vars: y, z", "nu[1,1]p.pch[p](pch[p](y,z), z)"}, 0,
       "rch[1,2](y,z)\n"},
      {"check rejects a zero hyperparameter",
       {"check", "--no-banner", "--context", "vars: x", "nu[1,0]p.x"}, 65, "zero hyperparameter"},
  };
}

inline int Runner::run_suite() {
  std::size_t failed = 0, total = 0;
  auto line = [&](bool pass, const std::string& name, const std::string& detail) {
    ++total;
    if (!pass) ++failed;
    out_ << (pass ? "PASS  " : "FAIL  ") << name;
    if (!detail.empty()) out_ << "  (" << detail << ")";
    out_ << "\n";
  };
  for (const auto& r : suite::run_examples()) line(r.pass, r.name, r.detail);
  for (const auto& e : cli_examples()) {
    std::ostringstream o, er;
    int code = run(e.args, o, er);
    bool pass = code == e.exit_code && (o.str() + er.str()).find(e.expect_in_output) != std::string::npos;
    line(pass, "cli: " + e.name, "exit " + std::to_string(code));
  }
  if (!o_.examples_only) {
    for (const auto& c : suite::all_criteria()) {
      auto r = c();
      ++total;
      if (!r.pass()) ++failed;
      out_ << suite::to_line(r) << "\n";
    }
  }
  out_ << (total - failed) << "/" << total << " passed\n";
  return failed == 0 ? ok : 1;
}

}  // namespace detail

/// Runs one command line (without the program name); returns the process exit code.
inline int run(std::vector<std::string> args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Decision procedure and evaluators for the Beta-Bernoulli theory", "bbt"};
  app.set_version_flag("--version", version);
  app.require_subcommand(1);
  app.fallthrough();

  detail::Options o;
  std::vector<std::string> positional;
  auto* ctx_opt = app.add_option("--context,-c", o.context, "context text or file, e.g. \"params: p ; vars: x:1\"");
  app.add_option("-t,--term", o.terms, "term text or file (repeatable)");
  app.add_option("--format", o.format, "output format")->check(CLI::IsMember({"text", "structured"}));
  app.add_flag("--no-banner", o.no_banner, "omit the version banner");

  auto* check = app.add_subcommand("check", "well-formedness diagnostics");
  auto* normalize = app.add_subcommand("normalize", "print the normal form");
  auto* decide = app.add_subcommand("decide", "decide derivable equality of two terms");
  auto* eval = app.add_subcommand("eval", "interpret a term on polynomial arguments");
  auto* replay = app.add_subcommand("replay", "replay a derivation file");
  auto* simulate = app.add_subcommand("simulate", "Monte-Carlo simulation with a chi-square check");
  auto* suite_cmd = app.add_subcommand("paper-suite", "run the worked examples and acceptance criteria");

  for (auto* s : {check, normalize, decide, eval, simulate}) s->add_option("terms", positional, "terms");
  decide->add_option("--corpus", o.corpus, "a .bbt file or a directory of them");
  eval->add_option("--arg", o.args, "argument, e.g. \"f_x(a) = a^2 + 1/2\" (repeatable)");
  replay->add_option("file", positional, "derivation file")->required();
  simulate->add_option("--trials", o.trials, "number of trials")->check(CLI::PositiveNumber);
  simulate->add_option("--seed", o.seed, "random seed");
  simulate->add_option("--impl", o.impl, "simulator")->check(CLI::IsMember({"polya", "betabern"}));
  simulate->add_option("--against", o.against, "compare with the exact distribution of this term instead");
  suite_cmd->add_flag("--examples-only", o.examples_only, "skip the timed criteria");

  bool deciding = false;
  try {
    std::reverse(args.begin(), args.end());
    app.parse(args);
    deciding = decide->parsed();
    o.have_context = ctx_opt->count() > 0;
    if (!replay->parsed()) o.terms.insert(o.terms.end(), positional.begin(), positional.end());
    if (!o.no_banner && o.format == "text") out << version << "\n";
    detail::Runner r(o, out, err);
    if (check->parsed()) return r.check();
    if (normalize->parsed()) return r.normalize();
    if (decide->parsed()) return o.corpus.empty() ? r.decide_pair() : r.decide_corpus(o.corpus);
    if (eval->parsed()) return r.eval();
    if (replay->parsed()) return r.replay(positional.at(0));
    if (simulate->parsed()) return r.simulate();
    return r.run_suite();
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e, out, err);
    return code == 0 ? ok : usage_error;
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << "\n";
    return deciding ? 2 : usage_error;
  } catch (const ParseError& e) {
    err << "error: " << detail::describe(e) << "\n";
    return deciding ? 2 : data_error;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return deciding ? 2 : data_error;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << "\n";
    return deciding ? 2 : internal_error;
  }
}

}  // namespace bb::cli
