#pragma once

#include "betabern/poly.hpp"

#include <vector>

namespace bb {

/// Beta(i, j) hyperparameters; both positive.
struct BetaParams {
  BigInt i, j;
};

/// Integral of q^a (1-q)^c against Beta(i,j), i.e. B(i+a, j+c) / B(i,j), as a product of
/// small ratios rather than factorials.
inline Rat beta_moment(const BetaParams& b, std::size_t a, std::size_t c) {
  if (b.i < 1 || b.j < 1) throw Error("beta hyperparameters must be positive");
  BigInt num = rising(b.i, a) * rising(b.j, c);
  BigInt den = rising(b.i + b.j, a + c);
  return Rat(num, den);
}

// ---------------------------------------------------------------------------
// Multi-indices over {0..k}^l, row-major with the first parameter most significant.
// ---------------------------------------------------------------------------

inline std::size_t cell_count(std::size_t k, std::size_t ell) {
  std::size_t n = 1;
  for (std::size_t r = 0; r < ell; ++r) n *= k + 1;
  return n;
}

inline std::vector<std::size_t> multi_index(std::size_t flat, std::size_t k, std::size_t ell) {
  std::vector<std::size_t> idx(ell);
  for (std::size_t r = ell; r-- > 0;) {
    idx[r] = flat % (k + 1);
    flat /= k + 1;
  }
  return idx;
}

inline std::size_t flat_index(const std::vector<std::size_t>& idx, std::size_t k) {
  std::size_t flat = 0;
  for (auto i : idx) flat = flat * (k + 1) + i;
  return flat;
}

/// b_{i,k}(p) = C(k,i) p^(k-i) (1-p)^i, expanded in the monomial basis of one variable.
inline Poly bernstein(std::size_t i, std::size_t k) {
  if (i > k) throw Error("bernstein index " + std::to_string(i) + " exceeds degree " + std::to_string(k));
  Poly out(1);
  // (1-p)^i = sum_r C(i,r) (-1)^r p^r
  BigInt lead = binomial(k, i);
  for (std::size_t r = 0; r <= i; ++r) {
    BigInt c = lead * binomial(i, r);
    if (r % 2) c = -c;
    out.add_term(Exponents{static_cast<std::uint32_t>(k - i + r)}, Rat(c));
  }
  return out;
}

/// b_{I,k}(p_1..p_l) = product of b_{i_r,k}(p_r), in `nvars` variables (the first l used).
inline Poly bernstein_multi(const std::vector<std::size_t>& I, std::size_t k, std::size_t nvars) {
  if (I.size() > nvars) throw Error("multi-index longer than the variable list");
  Poly out = Poly::constant(nvars, 1);
  for (std::size_t r = 0; r < I.size(); ++r) {
    Poly f(nvars);
    Poly b = bernstein(I[r], k);
    for (const auto& [e, c] : b.terms()) {
      Exponents g(nvars, 0);
      g[r] = e[0];
      f.add_term(g, c);
    }
    out = out * f;
  }
  return out;
}

/// Degree-(k+1) Bernstein coefficients of the polynomial with degree-k coefficients `a`.
inline std::vector<Rat> elevate(const std::vector<Rat>& a) {
  if (a.empty()) throw Error("empty coefficient vector");
  std::size_t k = a.size() - 1;
  std::vector<Rat> out(k + 2);
  for (std::size_t s = 0; s <= k + 1; ++s) {
    Rat v = 0;
    if (s <= k) v += Rat(BigInt(k + 1 - s), BigInt(k + 1)) * a[s];
    if (s >= 1) v += Rat(BigInt(s), BigInt(k + 1)) * a[s - 1];
    out[s] = v;
  }
  return out;
}

struct BernsteinTable {
  std::size_t k = 0;
  std::size_t ell = 0;
  std::vector<Rat> coeffs;  // row-major over {0..k}^ell
  bool nonnegative = true;
};

/// Coefficients of `poly` (in its first `ell` variables; any others must not occur) in the
/// tensor Bernstein basis of degree k.
inline BernsteinTable to_bernstein(const Poly& poly, std::size_t k, std::size_t ell) {
  if (ell > poly.nvars()) throw Error("too many parameters requested");
  BernsteinTable t{k, ell, std::vector<Rat>(cell_count(k, ell), Rat(0)), true};
  for (const auto& [e, c] : poly.terms()) {
    for (std::size_t r = 0; r < e.size(); ++r) {
      if (r >= ell && e[r] != 0) throw Error("polynomial depends on a variable outside the parameter list");
      if (r < ell && e[r] > k)
        throw Error("degree " + std::to_string(e[r]) + " exceeds Bernstein degree " + std::to_string(k));
    }
    // p^a = sum_i C(k-i, a)/C(k, a) b_{i,k}
    for (std::size_t flat = 0; flat < t.coeffs.size(); ++flat) {
      auto I = multi_index(flat, k, ell);
      Rat w = c;
      for (std::size_t r = 0; r < ell && w != 0; ++r)
        w *= Rat(binomial(k - I[r], e[r]), binomial(k, e[r]));
      t.coeffs[flat] += w;
    }
  }
  for (const auto& c : t.coeffs)
    if (c < 0) t.nonnegative = false;
  return t;
}

/// Expands a Bernstein table back into the monomial basis (`nvars` >= ell variables).
inline Poly from_bernstein(const BernsteinTable& t, std::size_t nvars) {
  Poly out(nvars);
  for (std::size_t flat = 0; flat < t.coeffs.size(); ++flat)
    if (t.coeffs[flat] != 0) out += bernstein_multi(multi_index(flat, t.k, t.ell), t.k, nvars) * t.coeffs[flat];
  return out;
}

}  // namespace bb
