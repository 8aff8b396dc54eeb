#pragma once

#include "betabern/numeric.hpp"

#include <cstdint>
#include <limits>
#include <memory>

namespace bb {

/// Exact rational polynomial coefficient: a reduced int64 fraction while the value fits,
/// otherwise a heap-allocated Rat.  The representation is canonical, so equality is
/// structural.
class Coeff {
 public:
  Coeff() = default;
  Coeff(std::int64_t n) : n_(n) {}  // NOLINT: implicit on purpose
  Coeff(const Rat& r) { set(r); }   // NOLINT

  Coeff(const Coeff& o) : n_(o.n_), d_(o.d_), big_(o.big_ ? std::make_unique<Rat>(*o.big_) : nullptr) {}
  Coeff(Coeff&&) noexcept = default;
  Coeff& operator=(const Coeff& o) {
    if (this != &o) {
      n_ = o.n_;
      d_ = o.d_;
      big_ = o.big_ ? std::make_unique<Rat>(*o.big_) : nullptr;
    }
    return *this;
  }
  Coeff& operator=(Coeff&&) noexcept = default;

  Rat rat() const { return big_ ? *big_ : Rat(BigInt(n_), BigInt(d_)); }
  operator Rat() const { return rat(); }  // NOLINT
  bool is_zero() const { return !big_ && n_ == 0; }

  Coeff& operator+=(const Coeff& o) { return add(o, false); }
  Coeff& operator-=(const Coeff& o) { return add(o, true); }
  Coeff& operator*=(const Coeff& o) {
    if (!big_ && !o.big_) {
      std::int64_t g1 = gcd64(n_, o.d_), g2 = gcd64(o.n_, d_);
      __int128 num = static_cast<__int128>(n_ / g1) * (o.n_ / g2);
      __int128 den = static_cast<__int128>(d_ / g2) * (o.d_ / g1);
      if (fits(num) && fits(den)) {
        n_ = static_cast<std::int64_t>(num);
        d_ = n_ == 0 ? 1 : static_cast<std::int64_t>(den);
        return *this;
      }
    }
    set(rat() * o.rat());
    return *this;
  }

  friend Coeff operator*(Coeff a, const Coeff& b) { return a *= b; }
  friend Coeff operator-(Coeff a) {
    if (a.big_) *a.big_ = -*a.big_;
    else a.n_ = -a.n_;
    return a;
  }

  friend bool operator==(const Coeff& a, const Coeff& b) {
    if (a.big_ || b.big_) return a.big_ && b.big_ && *a.big_ == *b.big_;
    return a.n_ == b.n_ && a.d_ == b.d_;
  }

 private:
  static bool fits(__int128 v) {
    return v > static_cast<__int128>(std::numeric_limits<std::int64_t>::min()) &&
           v <= static_cast<__int128>(std::numeric_limits<std::int64_t>::max());
  }

  static std::int64_t gcd64(std::int64_t a, std::int64_t b) {
    std::uint64_t x = a < 0 ? 0 - static_cast<std::uint64_t>(a) : static_cast<std::uint64_t>(a);
    std::uint64_t y = b < 0 ? 0 - static_cast<std::uint64_t>(b) : static_cast<std::uint64_t>(b);
    while (y) {
      std::uint64_t t = x % y;
      x = y;
      y = t;
    }
    return x == 0 ? 1 : static_cast<std::int64_t>(x);
  }

  static unsigned __int128 gcd128(unsigned __int128 x, unsigned __int128 y) {
    while (y) {
      unsigned __int128 t = x % y;
      x = y;
      y = t;
    }
    return x;
  }

  Coeff& add(const Coeff& o, bool subtract) {
    if (!big_ && !o.big_) {
      __int128 a = static_cast<__int128>(n_) * o.d_, b = static_cast<__int128>(o.n_) * d_;
      __int128 num = subtract ? a - b : a + b;
      __int128 den = static_cast<__int128>(d_) * o.d_;
      if (num == 0) {
        n_ = 0;
        d_ = 1;
        return *this;
      }
      unsigned __int128 g = gcd128(num < 0 ? static_cast<unsigned __int128>(-num) : static_cast<unsigned __int128>(num),
                                   static_cast<unsigned __int128>(den));
      num /= static_cast<__int128>(g);
      den /= static_cast<__int128>(g);
      if (fits(num) && fits(den)) {
        n_ = static_cast<std::int64_t>(num);
        d_ = static_cast<std::int64_t>(den);
        return *this;
      }
    }
    set(subtract ? Rat(rat() - o.rat()) : Rat(rat() + o.rat()));
    return *this;
  }

  void set(const Rat& r) {
    const auto* q = r.backend().data();
    if (mpz_fits_slong_p(mpq_numref(q)) && mpz_fits_slong_p(mpq_denref(q)) &&
        mpz_cmp_si(mpq_numref(q), std::numeric_limits<long>::min()) != 0) {
      n_ = mpz_get_si(mpq_numref(q));
      d_ = mpz_get_si(mpq_denref(q));
      big_.reset();
    } else {
      big_ = std::make_unique<Rat>(r);
    }
  }

  std::int64_t n_ = 0, d_ = 1;
  std::unique_ptr<Rat> big_;
};

}  // namespace bb
