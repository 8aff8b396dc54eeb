#pragma once

#include <boost/multiprecision/gmp.hpp>

#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace bb {

using BigInt = boost::multiprecision::mpz_int;
using Rat = boost::multiprecision::mpq_rational;

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline std::string to_string(const BigInt& v) { return v.str(); }

inline std::string to_string(const Rat& v) {
  if (boost::multiprecision::denominator(v) == 1) return boost::multiprecision::numerator(v).str();
  return boost::multiprecision::numerator(v).str() + "/" + boost::multiprecision::denominator(v).str();
}

inline BigInt numerator(const Rat& v) { return boost::multiprecision::numerator(v); }
inline BigInt denominator(const Rat& v) { return boost::multiprecision::denominator(v); }

inline BigInt gcd(const BigInt& a, const BigInt& b) { return boost::multiprecision::gcd(a, b); }
inline BigInt lcm(const BigInt& a, const BigInt& b) { return boost::multiprecision::lcm(a, b); }

/// Narrowing conversion used wherever a count drives a loop.
inline std::size_t to_size(const BigInt& v, std::string_view what) {
  if (v < 0 || v > BigInt(std::numeric_limits<std::uint32_t>::max()))
    throw Error(std::string(what) + " out of supported range: " + v.str());
  return static_cast<std::size_t>(v.convert_to<std::uint64_t>());
}

/// Strict decimal integer parsing; leading zeros never select another base.
inline BigInt parse_bigint(std::string_view text) {
  std::size_t pos = 0;
  bool negative = false;
  if (!text.empty() && (text[0] == '-' || text[0] == '+')) {
    negative = text[0] == '-';
    pos = 1;
  }
  if (pos == text.size()) throw Error("malformed integer literal '" + std::string(text) + "'");
  BigInt v = 0;
  for (; pos < text.size(); ++pos) {
    char c = text[pos];
    if (c < '0' || c > '9') throw Error("malformed integer literal '" + std::string(text) + "'");
    v = v * 10 + (c - '0');
  }
  return negative ? BigInt(-v) : v;
}

/// Parses "3", "-2", "7/4" or "0.25" into an exact rational.
inline Rat parse_rational(std::string_view text) {
  std::string s(text);
  if (s.empty()) throw Error("empty rational literal");
  auto dot = s.find('.');
  if (dot != std::string::npos) {
    std::string digits = s.substr(0, dot) + s.substr(dot + 1);
    BigInt den = boost::multiprecision::pow(BigInt(10), static_cast<unsigned>(s.size() - dot - 1));
    return Rat(parse_bigint(digits), den);
  }
  auto slash = s.find('/');
  if (slash == std::string::npos) return Rat(parse_bigint(s));
  BigInt den = parse_bigint(s.substr(slash + 1));
  if (den == 0) throw Error("zero denominator in '" + s + "'");
  return Rat(parse_bigint(s.substr(0, slash)), den);
}

/// Rising factorial a (a+1) ... (a+n-1).
inline BigInt rising(const BigInt& a, std::size_t n) {
  BigInt r = 1;
  for (std::size_t s = 0; s < n; ++s) r *= a + s;
  return r;
}

inline BigInt binomial(std::size_t n, std::size_t k) {
  if (k > n) return 0;
  BigInt r = 1;
  for (std::size_t s = 0; s < k; ++s) {
    r *= n - s;
    r /= s + 1;
  }
  return r;
}

/// Scales a nonnegative rational vector to the primitive integer vector on the same ray.
/// The zero vector maps to itself.
inline std::vector<BigInt> primitive(const std::vector<Rat>& v) {
  BigInt l = 1;
  for (const auto& x : v)
    if (x != 0) l = lcm(l, denominator(x));
  std::vector<BigInt> out;
  out.reserve(v.size());
  BigInt g = 0;
  for (const auto& x : v) {
    out.push_back(numerator(x) * (l / denominator(x)));
    g = gcd(g, out.back());
  }
  if (g > 1)
    for (auto& x : out) x /= g;
  return out;
}

inline std::vector<BigInt> primitive(std::vector<BigInt> v) {
  BigInt g = 0;
  for (const auto& x : v) g = gcd(g, x);
  if (g > 1)
    for (auto& x : v) x /= g;
  return v;
}

}  // namespace bb
