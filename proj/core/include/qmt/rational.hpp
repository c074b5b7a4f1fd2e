#pragma once

#include <compare>
#include <cstdlib>
#include <numeric>
#include <stdexcept>

namespace qmt {

// Small exact rational for slopes and weights (num/den, den > 0, reduced).
struct Rat {
  long num = 0;
  long den = 1;

  Rat() = default;
  Rat(long n) : num(n), den(1) {}
  Rat(long n, long d) : num(n), den(d) { reduce(); }

  void reduce() {
    if (den == 0) throw std::domain_error("Rat: zero denominator");
    if (den < 0) {
      num = -num;
      den = -den;
    }
    long g = std::gcd(std::abs(num), den);
    if (g > 1) {
      num /= g;
      den /= g;
    }
    if (num == 0) den = 1;
  }

  friend Rat operator+(Rat a, Rat b) { return Rat(a.num * b.den + b.num * a.den, a.den * b.den); }
  friend Rat operator-(Rat a, Rat b) { return Rat(a.num * b.den - b.num * a.den, a.den * b.den); }
  friend Rat operator*(Rat a, Rat b) { return Rat(a.num * b.num, a.den * b.den); }
  friend Rat operator/(Rat a, Rat b) {
    if (b.num == 0) throw std::domain_error("Rat: division by zero");
    return Rat(a.num * b.den, a.den * b.num);
  }
  Rat operator-() const { return Rat(-num, den); }
  friend bool operator==(const Rat& a, const Rat& b) { return a.num == b.num && a.den == b.den; }
  friend std::strong_ordering operator<=>(const Rat& a, const Rat& b) {
    long l = a.num * b.den, r = b.num * a.den;
    return l <=> r;
  }
  double to_double() const { return static_cast<double>(num) / static_cast<double>(den); }
  bool is_integer() const { return den == 1; }
};

// m*omega = ell/k with gcd(k, ell) = 1, k > 0.
struct KLPair {
  long k = 1;
  long ell = 0;
};

inline KLPair kl_of(long m, Rat omega) {
  Rat mw = Rat(m) * omega;
  return KLPair{mw.den, mw.num};
}

}  // namespace qmt
