#include <random>

#include "doctest.h"
#include "qmt/series.hpp"

using namespace qmt;

namespace {

Context ctx;

PuiseuxSeries from_pairs(int m, long trunc, std::initializer_list<std::pair<long, double>> kv) {
  PuiseuxSeries s(m, trunc);
  for (auto& [k, v] : kv) s.add_to_coeff(k, Cplx(v));
  s.normalize(ctx);
  return s;
}

PuiseuxSeries random_series(std::mt19937& rng, int m, long lo, long trunc) {
  std::uniform_real_distribution<double> d(-1.0, 1.0);
  PuiseuxSeries s(m, trunc);
  for (long k = lo; k < trunc; ++k) s.add_to_coeff(k, Cplx(d(rng), d(rng)));
  s.normalize(ctx);
  return s;
}

}  // namespace

TEST_CASE("add: cancellation, poles, identity") {
  auto one_plus_y = from_pairs(1, 8, {{0, 1}, {1, 1}});
  auto minus_y = from_pairs(1, 8, {{1, -1}});
  auto sum = one_plus_y + minus_y;
  sum.normalize(ctx);
  CHECK(sum.coeff(0) == Cplx(1));
  CHECK(sum.coeff(1) == Cplx(0));

  auto pole = from_pairs(1, 8, {{-1, 1}});
  auto twice = pole + pole;
  CHECK(twice.coeff(-1) == Cplx(2));

  auto f = random_series(*new std::mt19937(7), 1, -2, 8);
  auto z = PuiseuxSeries::zero(1, 8);
  auto fz = f + z;
  for (long k = -2; k < 8; ++k) CHECK(abs(fz.coeff(k) - f.coeff(k)) <= ctx.eps);
}

TEST_CASE("mul and invert") {
  // invert(1+y), N=4 -> 1 - y + y^2 - y^3
  auto f = from_pairs(1, 4, {{0, 1}, {1, 1}});
  auto h = invert(f, ctx);
  CHECK(h.trunc == 4);
  CHECK(h.coeff(0) == Cplx(1));
  CHECK(h.coeff(1) == Cplx(-1));
  CHECK(h.coeff(2) == Cplx(1));
  CHECK(h.coeff(3) == Cplx(-1));

  auto yinv = from_pairs(1, 6, {{-1, 1}});
  auto y = from_pairs(1, 6, {{1, 1}});
  auto p = yinv * y;
  CHECK(p.coeff(0) == Cplx(1));
  CHECK(p.ord(ctx).value == 0);

  auto two = from_pairs(1, 6, {{0, 2}});
  auto half = invert(two, ctx);
  CHECK(abs(half.coeff(0) - Cplx(0.5)) <= ctx.eps);

  CHECK_THROWS_AS(invert(PuiseuxSeries::zero(1, 6), ctx), ApparentlyZero);
}

TEST_CASE("ord semantics") {
  auto f = from_pairs(1, 8, {{-2, 1}, {1, 3}});
  CHECK(f.ord(ctx).value == -2);

  auto z = PuiseuxSeries::zero(1, 8);
  Ord o = z.ord(ctx);
  CHECK(o.infinite());
  CHECK(o.truncation_limited);

  // ord(y^3) with m=2: stored exponent k=3 in y_2 units (y^{3/2})
  auto g = PuiseuxSeries::monomial(2, 3, Cplx(1), 8);
  CHECK(g.ord(ctx).value == 3);
  CHECK(g.m == 2);
}

TEST_CASE("scale_variable") {
  Cplx q(2, 1);
  auto y2 = from_pairs(1, 8, {{2, 1}});
  auto s = y2.scaled_variable(q);
  CHECK(abs(s.coeff(2) - q * q) <= ctx.eps);

  auto c = from_pairs(1, 8, {{0, 5}});
  auto sc = c.scaled_variable(q);
  CHECK(abs(sc.coeff(0) - Cplx(5)) <= ctx.eps);

  auto lp = from_pairs(1, 8, {{-1, 1}, {1, 1}});
  auto sl = lp.scaled_variable(q);
  CHECK(abs(sl.coeff(-1) - Cplx(1) / q) <= ctx.eps);
  CHECK(abs(sl.coeff(1) - q) <= ctx.eps);

  // round trip f(qy) -> f(q^-1 q y)
  std::mt19937 rng(11);
  auto f = random_series(rng, 1, -3, 9);
  auto rt = f.scaled_variable(q).scaled_variable(Cplx(1) / q);
  for (long k = -3; k < 9; ++k) CHECK(abs(rt.coeff(k) - f.coeff(k)) <= 10 * ctx.eps);
}

TEST_CASE("galois_twist") {
  Cplx mu(-1);
  auto y = PuiseuxSeries::monomial(2, 1, Cplx(1), 8);
  auto t = y.galois_twisted(mu);
  CHECK(abs(t.coeff(1) + Cplx(1)) <= ctx.eps);

  auto y2 = PuiseuxSeries::monomial(2, 2, Cplx(1), 8);
  auto t2 = y2.galois_twisted(mu);
  CHECK(abs(t2.coeff(2) - Cplx(1)) <= ctx.eps);

  std::mt19937 rng(3);
  auto f = random_series(rng, 2, -4, 8);
  auto id = f.galois_twisted(Cplx(1));
  for (long k = -4; k < 8; ++k) CHECK(abs(id.coeff(k) - f.coeff(k)) <= ctx.eps);
}

TEST_CASE("ring laws to tolerance (distributivity on random series)") {
  std::mt19937 rng(17);
  for (int rep = 0; rep < 20; ++rep) {
    auto f = random_series(rng, 1, -2, 12);
    auto g = random_series(rng, 1, -1, 12);
    auto h = random_series(rng, 1, 0, 12);
    auto lhs = (f + g) * h;
    auto rhs = f * h + g * h;
    auto d = lhs - rhs;
    for (const auto& c : d.c) CHECK(abs(c) <= 10 * ctx.eps);
  }
}

TEST_CASE("invert is a right inverse up to truncation") {
  std::mt19937 rng(23);
  for (int rep = 0; rep < 10; ++rep) {
    auto f = random_series(rng, 1, -1, 14);
    if (f.apparently_zero(ctx)) continue;
    auto h = invert(f, ctx);
    auto p = f * h;
    p.normalize(ctx);
    CHECK(abs(p.coeff(0) - Cplx(1)) <= 100 * ctx.eps);
    for (long k = 1; k < p.trunc; ++k) CHECK(abs(p.coeff(k)) <= 100 * ctx.eps);
  }
}

TEST_CASE("ord is additive under multiplication") {
  std::mt19937 rng(29);
  for (int rep = 0; rep < 10; ++rep) {
    auto f = random_series(rng, 1, -2, 10);
    auto g = random_series(rng, 1, 1, 10);
    if (f.apparently_zero(ctx) || g.apparently_zero(ctx)) continue;
    auto p = f * g;
    CHECK(p.ord(ctx).value == f.ord(ctx).value + g.ord(ctx).value);
  }
}

TEST_CASE("exact backend: Gaussian rational series") {
  Context ectx;
  ExactSeries f(1, 6);
  f.add_to_coeff(0, GaussianRational(1));
  f.add_to_coeff(1, GaussianRational(Rational(1), Rational(1)));  // 1 + i
  auto h = invert(f, ectx);
  auto p = f * h;
  p.normalize(ectx);
  CHECK(p.coeff(0) == GaussianRational(1));
  for (long k = 1; k < p.trunc; ++k) CHECK(p.coeff(k).is_zero());
}

TEST_CASE("embedding: y_{mn}^n = y_m") {
  auto f = from_pairs(1, 5, {{-1, 2}, {3, 1}});
  auto e = f.embedded(3);
  CHECK(e.m == 3);
  CHECK(e.coeff(-3) == Cplx(2));
  CHECK(e.coeff(9) == Cplx(1));
  CHECK(e.trunc == 15);
}
