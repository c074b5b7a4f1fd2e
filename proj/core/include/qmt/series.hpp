#pragma once

#include <algorithm>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <vector>

#include "qmt/scalar.hpp"

namespace qmt {

// Sentinel for "no coefficient above eps up to the truncation order".
inline constexpr long kOrdInfinity = std::numeric_limits<long>::max() / 4;

struct Ord {
  long value = kOrdInfinity;      // exponent in y_m units
  bool truncation_limited = false;  // true if "zero as far as we can see"

  bool infinite() const { return value >= kOrdInfinity; }
};

// Truncated Puiseux series: sum of c[k - lo] * y_m^k for k in [lo, trunc).
// Invariants: every stored exponent is < trunc; coefficients with
// |c| <= eps are dropped by normalize(); the window is tight after normalize().
template <class K>
class SeriesT {
 public:
  int m = 1;
  long lo = 0;
  long trunc = 0;
  std::vector<K> c;

  SeriesT() = default;
  SeriesT(int m_, long trunc_) : m(m_), lo(0), trunc(trunc_) {}

  static SeriesT zero(int m, long trunc) { return SeriesT(m, trunc); }

  static SeriesT monomial(int m, long k, K coeff, long trunc) {
    SeriesT s(m, trunc);
    if (k < trunc) {
      s.lo = k;
      s.c.assign(1, std::move(coeff));
    }
    return s;
  }

  static SeriesT constant(int m, K coeff, long trunc) {
    return monomial(m, 0, std::move(coeff), trunc);
  }

  long hi() const { return lo + static_cast<long>(c.size()); }

  K coeff(long k) const {
    if (k < lo || k >= hi()) return K(0);
    return c[static_cast<std::size_t>(k - lo)];
  }

  void add_to_coeff(long k, const K& v) {
    if (k >= trunc) return;
    if (c.empty()) {
      lo = k;
      c.assign(1, v);
      return;
    }
    if (k < lo) {
      c.insert(c.begin(), static_cast<std::size_t>(lo - k), K(0));
      lo = k;
    } else if (k >= hi()) {
      c.resize(static_cast<std::size_t>(k - lo + 1), K(0));
    }
    c[static_cast<std::size_t>(k - lo)] += v;
  }

  void normalize(const Context& ctx) {
    std::size_t a = 0, b = c.size();
    while (a < b && ScalarTraits<K>::negligible(c[a], ctx.eps)) ++a;
    while (b > a && ScalarTraits<K>::negligible(c[b - 1], ctx.eps)) --b;
    if (a > 0 || b < c.size()) {
      c = std::vector<K>(c.begin() + a, c.begin() + b);
      lo += static_cast<long>(a);
    }
    for (auto& x : c)
      if (ScalarTraits<K>::negligible(x, ctx.eps)) x = K(0);
    if (c.empty()) lo = 0;
  }

  bool apparently_zero(const Context& ctx) const {
    for (const auto& x : c)
      if (!ScalarTraits<K>::negligible(x, ctx.eps)) return false;
    return true;
  }

  Ord ord(const Context& ctx) const {
    for (std::size_t i = 0; i < c.size(); ++i)
      if (!ScalarTraits<K>::negligible(c[i], ctx.eps))
        return Ord{lo + static_cast<long>(i), false};
    return Ord{kOrdInfinity, true};
  }

  K leading(const Context& ctx) const {
    Ord o = ord(ctx);
    if (o.infinite()) throw ApparentlyZero("series is apparently zero");
    return coeff(o.value);
  }

  SeriesT truncated(long new_trunc) const {
    SeriesT r = *this;
    if (new_trunc < r.trunc) r.trunc = new_trunc;
    while (!r.c.empty() && r.hi() > r.trunc) r.c.pop_back();
    if (r.c.empty()) r.lo = 0;
    return r;
  }

  // Multiply by y_m^k.
  SeriesT shifted(long k) const {
    SeriesT r = *this;
    r.lo += k;
    r.trunc = (trunc >= kOrdInfinity) ? trunc : trunc + k;
    return r;
  }

  // Embed K_m into K_{m*n}: y_m = y_{mn}^n, exponents scale by n.
  SeriesT embedded(int n) const {
    SeriesT r;
    r.m = m * n;
    r.lo = lo * n;
    r.trunc = (trunc >= kOrdInfinity) ? trunc : trunc * n;
    r.c.assign(c.size() == 0 ? 0 : static_cast<std::size_t>((c.size() - 1) * n + 1), K(0));
    for (std::size_t i = 0; i < c.size(); ++i) r.c[i * n] = c[i];
    if (c.empty()) r.lo = 0;
    return r;
  }

  // Galois twist: c_k -> mu^k c_k.
  SeriesT galois_twisted(const K& mu) const {
    SeriesT r = *this;
    if (r.c.empty()) return r;
    // mu^lo, then step by mu
    K p = ScalarTraits<K>::one();
    long e = lo;
    K base = mu;
    bool inv = e < 0;
    long n = inv ? -e : e;
    K acc = ScalarTraits<K>::one();
    K b = base;
    while (n > 0) {
      if (n & 1) acc *= b;
      b *= b;
      n >>= 1;
    }
    p = inv ? ScalarTraits<K>::one() / acc : acc;
    for (auto& x : r.c) {
      x *= p;
      p *= mu;
    }
    return r;
  }

  // Variable scaling: c_k -> c_k * q^k  (f(y) -> f(q y)).
  SeriesT scaled_variable(const K& q) const { return galois_twisted(q); }

  friend SeriesT operator+(const SeriesT& a, const SeriesT& b) {
    SeriesT r;
    r.m = a.m;
    r.trunc = std::min(a.trunc, b.trunc);
    if (a.c.empty() && b.c.empty()) return r;
    long lo = a.c.empty() ? b.lo : (b.c.empty() ? a.lo : std::min(a.lo, b.lo));
    long hi = std::min(std::max(a.hi(), b.hi()), r.trunc);
    if (hi <= lo) return r;
    r.lo = lo;
    r.c.assign(static_cast<std::size_t>(hi - lo), K(0));
    for (long k = lo; k < hi; ++k) r.c[static_cast<std::size_t>(k - lo)] = a.coeff(k) + b.coeff(k);
    return r;
  }

  friend SeriesT operator-(const SeriesT& a, const SeriesT& b) { return a + (-b); }

  SeriesT operator-() const {
    SeriesT r = *this;
    for (auto& x : r.c) x = -x;
    return r;
  }

  friend SeriesT operator*(const SeriesT& a, const SeriesT& b) {
    SeriesT r;
    r.m = a.m;
    if (a.c.empty() || b.c.empty()) {
      // 0 * g: the product is determined wherever either factor is; use the
      // best bound available from the zero factor's window.
      long ta = a.c.empty() ? (a.trunc >= kOrdInfinity ? kOrdInfinity : a.trunc + b.lo) : kOrdInfinity;
      long tb = b.c.empty() ? (b.trunc >= kOrdInfinity ? kOrdInfinity : b.trunc + a.lo) : kOrdInfinity;
      if (a.c.empty() && b.c.empty()) {
        ta = a.trunc >= kOrdInfinity ? kOrdInfinity : a.trunc;
        tb = b.trunc >= kOrdInfinity ? kOrdInfinity : b.trunc;
      }
      r.trunc = std::min(ta, tb);
      return r;
    }
    long ta = a.trunc >= kOrdInfinity ? kOrdInfinity : a.trunc + b.lo;
    long tb = b.trunc >= kOrdInfinity ? kOrdInfinity : b.trunc + a.lo;
    r.trunc = std::min(ta, tb);
    r.lo = a.lo + b.lo;
    long hi = std::min(a.hi() + b.hi() - 1, r.trunc);
    if (hi <= r.lo) {
      r.lo = 0;
      return r;
    }
    r.c.assign(static_cast<std::size_t>(hi - r.lo), K(0));
    for (std::size_t i = 0; i < a.c.size(); ++i) {
      if (a.lo + static_cast<long>(i) + b.lo >= hi) break;
      for (std::size_t j = 0; j < b.c.size(); ++j) {
        long k = a.lo + static_cast<long>(i) + b.lo + static_cast<long>(j);
        if (k >= hi) break;
        r.c[static_cast<std::size_t>(k - r.lo)] += a.c[i] * b.c[j];
      }
    }
    return r;
  }

  SeriesT& operator+=(const SeriesT& b) { return *this = *this + b; }
  SeriesT& operator-=(const SeriesT& b) { return *this = *this - b; }
  SeriesT& operator*=(const SeriesT& b) { return *this = *this * b; }

  friend SeriesT operator*(const K& s, const SeriesT& a) {
    SeriesT r = a;
    for (auto& x : r.c) x = s * x;
    return r;
  }
};

// Multiplicative inverse of a unit series: requires a detectable leading
// coefficient.  Result truncation: N - 2 ord(f).
template <class K>
SeriesT<K> invert(const SeriesT<K>& f, const Context& ctx) {
  Ord o = f.ord(ctx);
  if (o.infinite()) throw ApparentlyZero("invert: series is apparently zero up to truncation");
  long d = o.value;
  K c0 = f.coeff(d);
  long n = (f.trunc >= kOrdInfinity) ? kOrdInfinity : f.trunc - 2 * d;
  SeriesT<K> r;
  r.m = f.m;
  r.trunc = n;
  r.lo = -d;
  if (n <= -d) return r;
  long len = std::min<long>(n + d, (f.trunc >= kOrdInfinity ? ctx.trunc + d + 1 : f.trunc - d));
  if (len <= 0) return r;
  r.c.assign(static_cast<std::size_t>(len), K(0));
  // h_j solves sum_{i<=j} f_{d+i} h_{j-i} = delta_{j,0}, coefficient of y^{-d+j}.
  std::vector<K> h(static_cast<std::size_t>(len), K(0));
  h[0] = ScalarTraits<K>::one() / c0;
  for (long j = 1; j < len; ++j) {
    K s(0);
    for (long i = 1; i <= j; ++i) {
      K fi = f.coeff(d + i);
      if (!ScalarTraits<K>::negligible(fi, ctx.eps)) s += fi * h[static_cast<std::size_t>(j - i)];
    }
    h[static_cast<std::size_t>(j)] = -s / c0;
  }
  r.c = std::move(h);
  r.normalize(ctx);
  return r;
}

template <class K>
SeriesT<K> divide(const SeriesT<K>& a, const SeriesT<K>& b, const Context& ctx) {
  return a * invert(b, ctx);
}

// Auto-embed two series to a common ramification (lcm).
template <class K>
void to_common_ramification(SeriesT<K>& a, SeriesT<K>& b) {
  if (a.m == b.m) return;
  int g = std::gcd(a.m, b.m);
  int l = a.m / g * b.m;
  if (a.m != l) a = a.embedded(l / a.m);
  if (b.m != l) b = b.embedded(l / b.m);
}

template <class K>
bool approx_equal(const SeriesT<K>& a, const SeriesT<K>& b, const Context& ctx,
                  const Real& tol) {
  SeriesT<K> d = a - b;
  for (const auto& x : d.c)
    if (ScalarTraits<K>::magnitude(x) > tol) return false;
  return true;
}

using PuiseuxSeries = SeriesT<Cplx>;
using ExactSeries = SeriesT<GaussianRational>;

}  // namespace qmt
