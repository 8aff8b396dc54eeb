#pragma once

#include "betabern/normalizer.hpp"

#include <boost/math/distributions/chi_squared.hpp>

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

namespace bb {

enum class Impl { polya, betabern };

inline const char* to_string(Impl i) { return i == Impl::polya ? "polya" : "betabern"; }

inline Impl parse_impl(const std::string& s) {
  if (s == "polya") return Impl::polya;
  if (s == "betabern") return Impl::betabern;
  throw Error("unknown simulator '" + s + "' (expected polya or betabern)");
}

/// Problems preventing `t` from being simulated (empty = closed ground term).
inline std::vector<std::string> ground_problems(const Context& ctx, const Term& t) {
  std::vector<std::string> out;
  for (const auto& v : check_wellformed(ctx, t)) out.push_back(to_string(v.path) + ": " + v.message);
  for (const auto& v : ctx.vars)
    if (v.arity != 0) out.push_back("variable '" + v.name + "' has arity " + std::to_string(v.arity));
  for (const auto& p : t.free_params()) out.push_back("free parameter '" + p + "'");
  return out;
}

inline void require_ground(const Context& ctx, const Term& t) {
  auto problems = ground_problems(ctx, t);
  if (!problems.empty()) throw Error("not a closed ground term: " + problems.front());
}

namespace detail {

inline std::uint64_t small(const BigInt& v) {
  if (v < 0 || v > BigInt(std::numeric_limits<std::uint32_t>::max()))
    throw Error("weight " + v.str() + " is too large to simulate");
  return v.convert_to<std::uint64_t>();
}

/// True with probability a/(a+b), exactly.
template <class Rng>
bool flip(Rng& rng, std::uint64_t a, std::uint64_t b) {
  return std::uniform_int_distribution<std::uint64_t>(0, a + b - 1)(rng) < a;
}

struct Urn {
  std::string name;
  std::uint64_t t, f;
};

template <class Rng>
const std::string& polya(const Term& t, Rng& rng, std::vector<Urn>& urns) {
  switch (t.kind()) {
    case Kind::var_app:
      return t.name();
    case Kind::ratio:
      return polya(flip(rng, small(t.i()), small(t.j())) ? t.left() : t.right(), rng, urns);
    case Kind::param_choice: {
      auto it = std::find_if(urns.rbegin(), urns.rend(), [&](const Urn& u) { return u.name == t.name(); });
      if (it == urns.rend()) throw Error("parameter '" + t.name() + "' has no urn");
      bool left = flip(rng, it->t, it->f);
      ++(left ? it->t : it->f);
      return polya(left ? t.left() : t.right(), rng, urns);
    }
    case Kind::nu: {
      urns.push_back({t.name(), small(t.i()), small(t.j())});
      const std::string& out = polya(t.body(), rng, urns);
      urns.pop_back();
      return out;
    }
  }
  throw Error("unreachable");
}

/// Beta(i,j) for integers i,j >= 1: the i-th smallest of i+j-1 uniforms.
template <class Rng>
double sample_beta(Rng& rng, std::uint64_t i, std::uint64_t j) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> xs(i + j - 1);
  for (auto& x : xs) x = u(rng);
  std::nth_element(xs.begin(), xs.begin() + static_cast<std::ptrdiff_t>(i - 1), xs.end());
  return xs[i - 1];
}

template <class Rng>
const std::string& betabern(const Term& t, Rng& rng, std::vector<std::pair<std::string, double>>& env) {
  switch (t.kind()) {
    case Kind::var_app:
      return t.name();
    case Kind::ratio:
      return betabern(flip(rng, small(t.i()), small(t.j())) ? t.left() : t.right(), rng, env);
    case Kind::param_choice: {
      auto it = std::find_if(env.rbegin(), env.rend(), [&](const auto& e) { return e.first == t.name(); });
      if (it == env.rend()) throw Error("parameter '" + t.name() + "' has no sampled value");
      bool left = std::uniform_real_distribution<double>(0.0, 1.0)(rng) < it->second;
      return betabern(left ? t.left() : t.right(), rng, env);
    }
    case Kind::nu: {
      env.emplace_back(t.name(), sample_beta(rng, small(t.i()), small(t.j())));
      const std::string& out = betabern(t.body(), rng, env);
      env.pop_back();
      return out;
    }
  }
  throw Error("unreachable");
}

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

}  // namespace detail

/// One run of the urn implementation: ν creates an urn, a parameter choice draws from it
/// and returns the ball with a duplicate.
template <class Rng>
std::string run_polya(const Term& t, Rng& rng) {
  std::vector<detail::Urn> urns;
  return detail::polya(t, rng, urns);
}

/// One run of the sampling implementation: ν draws a bias once, choices flip it.
template <class Rng>
std::string run_betabern(const Term& t, Rng& rng) {
  std::vector<std::pair<std::string, double>> env;
  return detail::betabern(t, rng, env);
}

/// Independent generator for stream `index` of the master seed.
inline std::mt19937_64 stream_rng(std::uint64_t seed, std::uint64_t index) {
  return std::mt19937_64(detail::splitmix64(detail::splitmix64(seed) ^ detail::splitmix64(index + 1)));
}

using Counts = std::map<std::string, std::uint64_t>;

/// Leaf counts over `trials` runs; trials are split into fixed-size streams so the result
/// depends only on (term, trials, seed, impl).
inline Counts estimate(const Context& ctx, const Term& t, std::uint64_t trials, std::uint64_t seed, Impl impl) {
  require_ground(ctx, t);
  if (trials < 1) throw Error("trials must be at least 1");
  constexpr std::uint64_t chunk = 4096;
  Counts counts;
  for (std::uint64_t start = 0, stream = 0; start < trials; start += chunk, ++stream) {
    auto rng = stream_rng(seed, stream);
    std::uint64_t n = std::min(chunk, trials - start);
    for (std::uint64_t r = 0; r < n; ++r)
      ++counts[impl == Impl::polya ? run_polya(t, rng) : run_betabern(t, rng)];
  }
  return counts;
}

using Distribution = std::map<std::string, Rat>;

/// Exact leaf distribution of a closed ground term, read off its normal form.
inline Distribution exact_distribution(const Context& ctx, const Term& t) {
  require_ground(ctx, t);
  NormalForm nf = normalize(ctx, t);
  if (nf.weights.size() != 1) throw Error("ground normal form must have a single row");
  BigInt total = 0;
  for (const auto& w : nf.weights[0]) total += w;
  Distribution out;
  for (std::size_t c = 0; c < nf.chains.size(); ++c) {
    if (nf.chains[c].dimension() != 0) throw Error("ground normal form contains a binder");
    if (nf.weights[0][c] != 0) out[nf.chains[c].var] += Rat(nf.weights[0][c], total);
  }
  return out;
}

struct TrialReport {
  Impl impl = Impl::polya;
  std::uint64_t trials = 0;
  std::uint64_t seed = 0;
  Counts counts;
  Distribution expected;
  double chi_square = 0;
  std::size_t dof = 0;
  double threshold = 0;
  bool pass = true;
};

/// Pearson χ² of observed counts against an exact distribution, merging cells whose
/// expected count is below 5; passes below the 99.9% quantile.
inline TrialReport chi_square_test(const Counts& counts, const Distribution& expected, std::uint64_t trials) {
  if (trials < 5) throw Error("at least 5 trials are needed for a chi-square comparison");
  TrialReport r;
  r.trials = trials;
  r.counts = counts;
  r.expected = expected;
  for (const auto& [name, c] : counts) {
    auto it = expected.find(name);
    if (c > 0 && (it == expected.end() || it->second == 0)) {
      r.chi_square = std::numeric_limits<double>::infinity();
      r.pass = false;
    }
  }
  struct Cell {
    double expected;
    double observed;
  };
  std::vector<Cell> cells;
  for (const auto& [name, p] : expected) {
    if (p == 0) continue;
    auto it = counts.find(name);
    cells.push_back({p.convert_to<double>() * static_cast<double>(trials),
                     it == counts.end() ? 0.0 : static_cast<double>(it->second)});
  }
  std::sort(cells.begin(), cells.end(), [](const Cell& a, const Cell& b) { return a.expected < b.expected; });
  std::vector<Cell> merged;
  Cell pool{0, 0};
  for (const auto& c : cells) {
    pool.expected += c.expected;
    pool.observed += c.observed;
    if (pool.expected >= 5) {
      merged.push_back(pool);
      pool = {0, 0};
    }
  }
  if (pool.expected > 0) {
    if (merged.empty()) merged.push_back(pool);
    else {
      merged.back().expected += pool.expected;
      merged.back().observed += pool.observed;
    }
  }
  r.dof = merged.empty() ? 0 : merged.size() - 1;
  if (!r.pass) return r;
  double chi = 0;
  for (const auto& c : merged) chi += (c.observed - c.expected) * (c.observed - c.expected) / c.expected;
  r.chi_square = chi;
  if (r.dof == 0) {
    r.threshold = 0;
    r.pass = true;
    return r;
  }
  boost::math::chi_squared dist(static_cast<double>(r.dof));
  r.threshold = boost::math::quantile(dist, 0.999);
  r.pass = chi < r.threshold;
  return r;
}

/// Simulates `t` and tests the counts against `expected`.
inline TrialReport compare_with(const Context& ctx, const Term& t, const Distribution& expected, std::uint64_t trials,
                                std::uint64_t seed, Impl impl) {
  TrialReport r = chi_square_test(estimate(ctx, t, trials, seed, impl), expected, trials);
  r.impl = impl;
  r.seed = seed;
  return r;
}

/// Simulates `t` and tests the counts against its own exact distribution.
inline TrialReport compare(const Context& ctx, const Term& t, std::uint64_t trials, std::uint64_t seed, Impl impl) {
  return compare_with(ctx, t, exact_distribution(ctx, t), trials, seed, impl);
}

inline std::string to_text(const TrialReport& r) {
  std::set<std::string> names;
  for (const auto& [n, c] : r.counts) names.insert(n);
  for (const auto& [n, p] : r.expected) names.insert(n);
  std::size_t width = 4;
  for (const auto& n : names) width = std::max(width, n.size());
  std::ostringstream os;
  os << "impl        " << to_string(r.impl) << "\n";
  os << "trials      " << r.trials << "\n";
  os << "seed        " << r.seed << "\n";
  os << std::left << std::setw(static_cast<int>(width)) << "leaf" << "  " << std::right << std::setw(10) << "count"
     << "  " << std::setw(10) << "observed" << "  " << std::setw(10) << "expected" << "\n";
  for (const auto& n : names) {
    auto c = r.counts.count(n) ? r.counts.at(n) : 0;
    Rat p = r.expected.count(n) ? r.expected.at(n) : Rat(0);
    os << std::left << std::setw(static_cast<int>(width)) << n << "  " << std::right << std::setw(10) << c << "  "
       << std::setw(10) << std::fixed << std::setprecision(6) << static_cast<double>(c) / static_cast<double>(r.trials)
       << "  " << std::setw(10) << p.convert_to<double>() << "\n";
  }
  os << std::defaultfloat << std::setprecision(6);
  os << "chi_square  " << r.chi_square << "\n";
  os << "dof         " << r.dof << "\n";
  os << "threshold   " << r.threshold << "\n";
  os << "pass        " << (r.pass ? "yes" : "no") << "\n";
  for (const auto& n : names)
    os << "leaf " << n << " " << (r.counts.count(n) ? r.counts.at(n) : 0) << " "
       << to_string(r.expected.count(n) ? r.expected.at(n) : Rat(0)) << "\n";
  return os.str();
}

}  // namespace bb
