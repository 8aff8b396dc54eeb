#pragma once

#include "betabern/coeff.hpp"

#include <algorithm>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

namespace bb {

using Exponents = std::vector<std::uint32_t>;

/// Multivariate polynomial with exact rational coefficients over a fixed number of
/// variables.  Terms are kept in ascending lexicographic exponent order in flat arrays;
/// no zero coefficient is ever stored.
class Poly {
 public:
  using Terms = std::vector<std::pair<Exponents, Rat>>;

  Poly() = default;
  explicit Poly(std::size_t nvars) : nvars_(nvars) {}

  static Poly constant(std::size_t nvars, const Rat& c) {
    Poly p(nvars);
    if (c != 0) {
      p.exps_.assign(nvars, 0);
      p.coeffs_.emplace_back(c);
    }
    return p;
  }
  static Poly variable(std::size_t nvars, std::size_t index) {
    Exponents e(nvars, 0);
    e.at(index) = 1;
    return monomial(std::move(e));
  }
  static Poly monomial(Exponents e, const Rat& c = 1) {
    Poly p(e.size());
    if (c != 0) {
      p.exps_ = std::move(e);
      p.coeffs_.push_back(c);
    }
    return p;
  }

  /// Builds a polynomial from unsorted terms (flat exponent rows), combining duplicates.
  static Poly from_terms(std::size_t nvars, const std::vector<std::uint32_t>& exps, const std::vector<Rat>& coeffs) {
    return from_coeffs(nvars, exps, std::vector<Coeff>(coeffs.begin(), coeffs.end()));
  }

  static Poly from_coeffs(std::size_t nvars, const std::vector<std::uint32_t>& exps, std::vector<Coeff> coeffs) {
    if (exps.size() != nvars * coeffs.size()) throw Error("exponent table has the wrong size");
    std::vector<std::size_t> order(coeffs.size());
    for (std::size_t k = 0; k < order.size(); ++k) order[k] = k;
    auto row = [&](std::size_t k) { return exps.begin() + static_cast<std::ptrdiff_t>(k * nvars); };
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return std::lexicographical_compare(row(a), row(a) + static_cast<std::ptrdiff_t>(nvars), row(b),
                                          row(b) + static_cast<std::ptrdiff_t>(nvars));
    });
    Poly p(nvars);
    for (std::size_t n = 0; n < order.size();) {
      std::size_t m = n + 1;
      Coeff c = std::move(coeffs[order[n]]);
      while (m < order.size() && std::equal(row(order[n]), row(order[n]) + static_cast<std::ptrdiff_t>(nvars), row(order[m])))
        c += coeffs[order[m++]];
      if (!c.is_zero()) p.push(&*row(order[n]), std::move(c));
      n = m;
    }
    return p;
  }

  std::size_t nvars() const { return nvars_; }
  std::size_t term_count() const { return coeffs_.size(); }
  bool is_zero() const { return coeffs_.empty(); }
  const std::uint32_t* exponents(std::size_t term) const { return exps_.data() + term * nvars_; }
  Rat coeff(std::size_t term) const { return coeffs_[term].rat(); }

  /// Terms as (exponents, coefficient) pairs in ascending exponent order.
  Terms terms() const {
    Terms out;
    out.reserve(coeffs_.size());
    for (std::size_t k = 0; k < coeffs_.size(); ++k)
      out.emplace_back(Exponents(exponents(k), exponents(k) + nvars_), coeffs_[k].rat());
    return out;
  }

  void add_term(const Exponents& e, const Rat& c) {
    if (e.size() != nvars_) throw Error("exponent vector has the wrong length");
    if (c == 0) return;
    std::size_t at = lower_bound(e.data());
    if (at < coeffs_.size() && std::equal(e.begin(), e.end(), exponents(at))) {
      coeffs_[at] += Coeff(c);
      if (coeffs_[at].is_zero()) erase(at);
      return;
    }
    exps_.insert(exps_.begin() + static_cast<std::ptrdiff_t>(at * nvars_), e.begin(), e.end());
    coeffs_.insert(coeffs_.begin() + static_cast<std::ptrdiff_t>(at), Coeff(c));
  }

  Rat coefficient(const Exponents& e) const {
    if (e.size() != nvars_) return Rat(0);
    std::size_t at = lower_bound(e.data());
    if (at < coeffs_.size() && std::equal(e.begin(), e.end(), exponents(at))) return coeffs_[at].rat();
    return Rat(0);
  }

  std::size_t degree_in(std::size_t var) const {
    std::size_t d = 0;
    for (std::size_t k = 0; k < coeffs_.size(); ++k) d = std::max<std::size_t>(d, exponents(k)[var]);
    return d;
  }

  Poly& operator+=(const Poly& o) {
    check_ring(o);
    *this = merge(std::move(*this), o, false);
    return *this;
  }
  Poly& operator-=(const Poly& o) {
    check_ring(o);
    *this = merge(std::move(*this), o, true);
    return *this;
  }
  Poly& operator*=(const Rat& s) {
    if (s == 0) {
      exps_.clear();
      coeffs_.clear();
    } else {
      Coeff f(s);
      for (auto& c : coeffs_) c *= f;
    }
    return *this;
  }

  friend Poly operator+(Poly a, const Poly& b) { return a += b; }
  friend Poly operator-(Poly a, const Poly& b) { return a -= b; }
  friend Poly operator*(Poly a, const Rat& s) { return a *= s; }
  friend Poly operator*(const Rat& s, Poly a) { return a *= s; }

  friend Poly operator*(const Poly& a, const Poly& b) {
    a.check_ring(b);
    std::size_t n = a.nvars_;
    std::vector<std::uint32_t> exps;
    std::vector<Coeff> coeffs;
    exps.reserve(a.term_count() * b.term_count() * n);
    coeffs.reserve(a.term_count() * b.term_count());
    for (std::size_t x = 0; x < a.term_count(); ++x)
      for (std::size_t y = 0; y < b.term_count(); ++y) {
        for (std::size_t k = 0; k < n; ++k) exps.push_back(a.exponents(x)[k] + b.exponents(y)[k]);
        coeffs.push_back(a.coeffs_[x] * b.coeffs_[y]);
      }
    return from_coeffs(n, exps, std::move(coeffs));
  }

  /// Multiplies by the variable with the given index (order is preserved).
  Poly times_variable(std::size_t var) const& { return Poly(*this).times_variable(var); }
  Poly times_variable(std::size_t var) && {
    if (var >= nvars_) throw Error("variable index out of range");
    for (std::size_t k = 0; k < coeffs_.size(); ++k) ++exps_[k * nvars_ + var];
    return std::move(*this);
  }

  /// Appends `extra` variables that do not occur.
  Poly extended(std::size_t extra) const {
    if (extra == 0) return *this;
    Poly out(nvars_ + extra);
    out.coeffs_ = coeffs_;
    out.exps_.reserve(coeffs_.size() * (nvars_ + extra));
    for (std::size_t k = 0; k < coeffs_.size(); ++k) {
      out.exps_.insert(out.exps_.end(), exponents(k), exponents(k) + nvars_);
      out.exps_.insert(out.exps_.end(), extra, 0);
    }
    return out;
  }

  /// Replaces the last variable x by the scalar moment(exponent of x) and drops it.
  template <class Moment>
  Poly integrate_last(Moment&& moment) const {
    if (nvars_ == 0) throw Error("no variable to integrate");
    std::size_t m = nvars_ - 1;
    std::vector<std::optional<Coeff>> cache;
    auto mom = [&](std::uint32_t a) -> const Coeff& {
      if (cache.size() <= a) cache.resize(a + 1);
      if (!cache[a]) cache[a] = Coeff(Rat(moment(a)));
      return *cache[a];
    };
    Poly out(m);
    // Terms sharing all but the last exponent are adjacent.
    for (std::size_t n = 0; n < coeffs_.size();) {
      Coeff c = coeffs_[n] * mom(exponents(n)[m]);
      std::size_t r = n + 1;
      for (; r < coeffs_.size() && std::equal(exponents(n), exponents(n) + m, exponents(r)); ++r)
        c += coeffs_[r] * mom(exponents(r)[m]);
      if (!c.is_zero()) out.push(exponents(n), std::move(c));
      n = r;
    }
    return out;
  }

  Rat evaluate(const std::vector<Rat>& point) const {
    if (point.size() != nvars_) throw Error("evaluation point has wrong dimension");
    Rat s = 0;
    for (std::size_t t = 0; t < coeffs_.size(); ++t) {
      Rat m = coeffs_[t].rat();
      for (std::size_t k = 0; k < nvars_; ++k)
        for (std::uint32_t r = 0; r < exponents(t)[k]; ++r) m *= point[k];
      s += m;
    }
    return s;
  }

  friend bool operator==(const Poly& a, const Poly& b) {
    return a.nvars_ == b.nvars_ && a.exps_ == b.exps_ && a.coeffs_ == b.coeffs_;
  }

  /// Canonical rendering: graded-descending monomial order, variables named by `names`.
  std::string to_string(const std::vector<std::string>& names) const;

 private:
  void check_ring(const Poly& o) const {
    if (o.nvars_ != nvars_) throw Error("polynomials live in different rings");
  }

  // Appends a term known to sort after every stored term (or to start a fresh row).
  void push(const std::uint32_t* e, Coeff c) {
    exps_.insert(exps_.end(), e, e + nvars_);
    coeffs_.push_back(std::move(c));
  }

  void erase(std::size_t at) {
    auto first = exps_.begin() + static_cast<std::ptrdiff_t>(at * nvars_);
    exps_.erase(first, first + static_cast<std::ptrdiff_t>(nvars_));
    coeffs_.erase(coeffs_.begin() + static_cast<std::ptrdiff_t>(at));
  }

  int compare(const std::uint32_t* a, const std::uint32_t* b) const {
    for (std::size_t k = 0; k < nvars_; ++k)
      if (a[k] != b[k]) return a[k] < b[k] ? -1 : 1;
    return 0;
  }

  std::size_t lower_bound(const std::uint32_t* e) const {
    std::size_t lo = 0, hi = coeffs_.size();
    while (lo < hi) {
      std::size_t mid = (lo + hi) / 2;
      if (compare(exponents(mid), e) < 0) lo = mid + 1;
      else hi = mid;
    }
    return lo;
  }

  static Poly merge(Poly&& a, const Poly& b, bool subtract) {
    Poly out(a.nvars_);
    out.exps_.reserve(a.exps_.size() + b.exps_.size());
    out.coeffs_.reserve(a.coeffs_.size() + b.coeffs_.size());
    std::size_t x = 0, y = 0;
    while (x < a.term_count() || y < b.term_count()) {
      int c = x == a.term_count() ? 1 : y == b.term_count() ? -1 : a.compare(a.exponents(x), b.exponents(y));
      if (c < 0) {
        out.push(a.exponents(x), std::move(a.coeffs_[x]));
        ++x;
      } else if (c > 0) {
        out.push(b.exponents(y), subtract ? -b.coeffs_[y] : b.coeffs_[y]);
        ++y;
      } else {
        Coeff& s = a.coeffs_[x];
        if (subtract) s -= b.coeffs_[y];
        else s += b.coeffs_[y];
        if (!s.is_zero()) out.push(a.exponents(x), std::move(s));
        ++x, ++y;
      }
    }
    return out;
  }

  std::size_t nvars_ = 0;
  std::vector<std::uint32_t> exps_;  // term-major rows of nvars_ exponents
  std::vector<Coeff> coeffs_;
};

inline std::string Poly::to_string(const std::vector<std::string>& names) const {
  if (coeffs_.empty()) return "0";
  Terms order = terms();
  std::stable_sort(order.begin(), order.end(), [](const auto& a, const auto& b) {
    std::uint64_t da = 0, db = 0;
    for (auto x : a.first) da += x;
    for (auto x : b.first) db += x;
    if (da != db) return da > db;
    return a.first > b.first;
  });
  std::ostringstream os;
  bool first = true;
  for (const auto& [e, c] : order) {
    Rat mag = c < 0 ? Rat(-c) : c;
    if (first) os << (c < 0 ? "-" : "");
    else os << (c < 0 ? " - " : " + ");
    first = false;
    bool is_const = std::all_of(e.begin(), e.end(), [](auto x) { return x == 0; });
    bool wrote = false;
    if (mag != 1 || is_const) {
      os << bb::to_string(mag);
      wrote = true;
    }
    for (std::size_t k = 0; k < e.size(); ++k) {
      if (e[k] == 0) continue;
      if (wrote) os << '*';
      os << (k < names.size() ? names[k] : "v" + std::to_string(k));
      if (e[k] > 1) os << '^' << e[k];
      wrote = true;
    }
  }
  return os.str();
}

}  // namespace bb
