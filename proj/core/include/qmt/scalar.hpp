#pragma once

#include <boost/multiprecision/cpp_bin_float.hpp>
#include <boost/multiprecision/cpp_complex.hpp>
#include <boost/multiprecision/cpp_int.hpp>

#include <stdexcept>
#include <string>

namespace qmt {

namespace mp = boost::multiprecision;

// 128 mantissa bits, binary.  All floating computation in the toolkit runs at
// this precision; epsilon and truncation order are runtime context values.
inline constexpr unsigned kPrecisionBits = 128;

using Real = mp::number<mp::cpp_bin_float<kPrecisionBits, mp::backends::digit_base_2>,
                        mp::et_off>;
using Cplx = mp::number<mp::complex_adaptor<mp::cpp_bin_float<kPrecisionBits, mp::backends::digit_base_2>>,
                        mp::et_off>;
using Rational = mp::cpp_rational;

Real pi_const();

inline Cplx cplx_i() { return Cplx(0, 1); }

// Comparison context: |x - y| <= eps * max(1, |x|, |y|).
struct Context {
  unsigned precision_bits = kPrecisionBits;
  Real eps = Real("1e-24");
  long trunc = 24;

  bool approx_zero(const Real& x) const { return abs(x) <= eps; }
  bool approx_zero(const Cplx& x) const { return abs(x) <= eps; }
  bool approx_eq(const Real& x, const Real& y) const {
    Real m = 1;
    if (abs(x) > m) m = abs(x);
    if (abs(y) > m) m = abs(y);
    return abs(x - y) <= eps * m;
  }
  bool approx_eq(const Cplx& x, const Cplx& y) const {
    Real m = 1;
    if (abs(x) > m) m = abs(x);
    if (abs(y) > m) m = abs(y);
    return abs(x - y) <= eps * m;
  }
};

struct ApparentlyZero : std::runtime_error {
  explicit ApparentlyZero(const std::string& what) : std::runtime_error(what) {}
};

// Exact backend: Gaussian rationals a + b i with a, b in Q.  Covers exact
// arithmetic with the roots of unity contained in Q(i), i.e. {1,-1,i,-i}.
struct GaussianRational {
  Rational re{0};
  Rational im{0};

  GaussianRational() = default;
  GaussianRational(long r) : re(r) {}
  GaussianRational(Rational r) : re(std::move(r)) {}
  GaussianRational(Rational r, Rational i) : re(std::move(r)), im(std::move(i)) {}

  bool is_zero() const { return re == 0 && im == 0; }

  friend GaussianRational operator+(const GaussianRational& a, const GaussianRational& b) {
    return {a.re + b.re, a.im + b.im};
  }
  friend GaussianRational operator-(const GaussianRational& a, const GaussianRational& b) {
    return {a.re - b.re, a.im - b.im};
  }
  GaussianRational operator-() const { return {-re, -im}; }
  friend GaussianRational operator*(const GaussianRational& a, const GaussianRational& b) {
    return {a.re * b.re - a.im * b.im, a.re * b.im + a.im * b.re};
  }
  friend GaussianRational operator/(const GaussianRational& a, const GaussianRational& b) {
    Rational n = b.re * b.re + b.im * b.im;
    if (n == 0) throw std::domain_error("GaussianRational: division by zero");
    return {(a.re * b.re + a.im * b.im) / n, (a.im * b.re - a.re * b.im) / n};
  }
  GaussianRational& operator+=(const GaussianRational& b) { return *this = *this + b; }
  GaussianRational& operator-=(const GaussianRational& b) { return *this = *this - b; }
  GaussianRational& operator*=(const GaussianRational& b) { return *this = *this * b; }
  GaussianRational& operator/=(const GaussianRational& b) { return *this = *this / b; }
  friend bool operator==(const GaussianRational& a, const GaussianRational& b) {
    return a.re == b.re && a.im == b.im;
  }
};

// What the generic series / linear-algebra layers need from a coefficient type.
template <class K>
struct ScalarTraits;

template <>
struct ScalarTraits<Cplx> {
  static bool negligible(const Cplx& c, const Real& eps) { return abs(c) <= eps; }
  static Real magnitude(const Cplx& c) { return abs(c); }
  static Cplx one() { return Cplx(1); }
};

template <>
struct ScalarTraits<GaussianRational> {
  static bool negligible(const GaussianRational& c, const Real&) { return c.is_zero(); }
  static Real magnitude(const GaussianRational& c) {
    return Real(c.re.convert_to<double>() == 0 && c.im.convert_to<double>() == 0 && !c.is_zero()
                    ? 1e-300
                    : std::abs(c.re.convert_to<double>()) + std::abs(c.im.convert_to<double>()));
  }
  static GaussianRational one() { return GaussianRational(1); }
};

}  // namespace qmt
