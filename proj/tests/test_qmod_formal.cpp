#include <random>

#include "doctest.h"
#include "qmt/cyclic.hpp"
#include "qmt/splitting.hpp"

using namespace qmt;

namespace {
Context ctx;
QContext qc3{Cplx(3)};
const long N = 16;
}  // namespace

TEST_CASE("apply_phi on basic examples") {
  // L_1(1): A = [y^-1], Phi(e) = y^-1 e
  FormalQModule L = module_L(1, Rat(1), qc3, N);
  SeriesVec v{PuiseuxSeries::constant(1, Cplx(1), N)};
  auto out = apply_phi(L, v, ctx);
  CHECK(out[0].ord(ctx).value == -1);
  CHECK(abs(out[0].coeff(-1) - Cplx(1)) <= ctx.eps);

  // A = I, v = (y) -> (q y)
  FormalQModule T = module_V(1, cmat_identity(1), qc3, N);
  SeriesVec w{PuiseuxSeries::monomial(1, 1, Cplx(1), N)};
  auto ow = apply_phi(T, w, ctx);
  CHECK(abs(ow[0].coeff(1) - Cplx(3)) <= ctx.eps);

  // A = diag(2,3), v = (1,1) -> (2,3)
  CMat D(2, 2, Cplx(0));
  D.at(0, 0) = 2;
  D.at(1, 1) = 3;
  FormalQModule M = module_V(1, D, qc3, N);
  SeriesVec u{PuiseuxSeries::constant(1, Cplx(1), N), PuiseuxSeries::constant(1, Cplx(1), N)};
  auto ou = apply_phi(M, u, ctx);
  CHECK(abs(ou[0].coeff(0) - Cplx(2)) <= ctx.eps);
  CHECK(abs(ou[1].coeff(0) - Cplx(3)) <= ctx.eps);
}

TEST_CASE("find_cyclic_vector") {
  // L_1(1): e1 cyclic, relation a_0 = y^-1
  FormalQModule L = module_L(1, Rat(1), qc3, N);
  auto c = find_cyclic_vector(L, ctx);
  REQUIRE(c.has_value());
  CHECK(c->relation.size() == 1);
  CHECK(c->relation[0].ord(ctx).value == -1);

  // diag(y^-1, 1): e1+e2 cyclic
  FormalQModule M;
  M.m = 1;
  M.q_m = qc3.q;
  M.trunc = N;
  M.A = smat_zero<Cplx>(2, 2, 1, N);
  M.A.at(0, 0) = PuiseuxSeries::monomial(1, -1, Cplx(1), N);
  M.A.at(1, 1) = PuiseuxSeries::constant(1, Cplx(1), N);
  auto c2 = find_cyclic_vector(M, ctx);
  REQUIRE(c2.has_value());

  // q = 1 and A = I: every <v> has rank 1, budget exhausts
  QContext q1{Cplx(1)};
  FormalQModule T = module_V(1, cmat_identity(2), q1, N);
  auto c3 = find_cyclic_vector(T, ctx);
  CHECK(!c3.has_value());
}

TEST_CASE("top_slope from relation orders") {
  CyclicData c;
  c.v = {};
  // r=2, a_0 = y^-2, a_1 = 0 -> max{2/2} = 1 -> (1,1)
  c.relation = {PuiseuxSeries::monomial(1, -2, Cplx(1), N), PuiseuxSeries::zero(1, N)};
  auto t = top_slope(c, ctx);
  CHECK(t.ell == 1);
  CHECK(t.s == 1);
  // r=1, a_0 = y^-3 -> (3,1)
  c.relation = {PuiseuxSeries::monomial(1, -3, Cplx(1), N)};
  t = top_slope(c, ctx);
  CHECK(t.ell == 3);
  CHECK(t.s == 1);
  // r=2, a_0 = 1, a_1 = y^-1 -> max{0/2, 1/1} = 1
  c.relation = {PuiseuxSeries::constant(1, Cplx(1), N), PuiseuxSeries::monomial(1, -1, Cplx(1), N)};
  t = top_slope(c, ctx);
  CHECK(t.ell == 1);
  CHECK(t.s == 1);
}

TEST_CASE("block_split on the worked 2x2 example") {
  // A = diag(1,2) + y E_12, q = 3: G_12 solves 1*g*3 - g*2 = -1 => g = -1
  FormalQModule M;
  M.m = 1;
  M.q_m = Cplx(3);
  M.trunc = N;
  M.A = smat_zero<Cplx>(2, 2, 1, N);
  M.A.at(0, 0) = PuiseuxSeries::constant(1, Cplx(1), N);
  M.A.at(1, 1) = PuiseuxSeries::constant(1, Cplx(2), N);
  M.A.at(0, 1) = PuiseuxSeries::monomial(1, 1, Cplx(1), N);
  auto res = block_split(M, 0, 1, ctx);
  CHECK(abs(res.gauge.at(0, 1).coeff(1) - Cplx(-1)) <= 10 * ctx.eps);
  // gauged off-diagonal apparently zero
  FormalQModule g = gauge_transform(M, res.gauge, ctx);
  CHECK(g.A.at(0, 1).apparently_zero(ctx));
  CHECK(g.A.at(1, 0).apparently_zero(ctx));

  // already block-diagonal -> G = I
  FormalQModule D = M;
  D.A.at(0, 1) = PuiseuxSeries::zero(1, N);
  auto res2 = block_split(D, 0, 1, ctx);
  CHECK(res2.gauge.at(0, 1).apparently_zero(ctx));
  CHECK(res2.gauge.at(1, 0).apparently_zero(ctx));
}

TEST_CASE("block_split recovers constructed gauge") {
  // A = G0^{-1} diag(y^-1, 1) sigma(G0), G0 = I + y E21
  FormalQModule D;
  D.m = 1;
  D.q_m = Cplx(3);
  D.trunc = N;
  D.A = smat_zero<Cplx>(2, 2, 1, N);
  D.A.at(0, 0) = PuiseuxSeries::monomial(1, -1, Cplx(1), N);
  D.A.at(1, 1) = PuiseuxSeries::constant(1, Cplx(1), N);
  PMat G0 = smat_identity<Cplx>(2, 1, N);
  G0.at(1, 0) = PuiseuxSeries::monomial(1, 1, Cplx(1), N);
  FormalQModule M = gauge_transform(D, G0, ctx);
  auto res = block_split(M, 1, 1, ctx);
  // recovered blocks ~ diag(y^-1), (1): compare leading data
  CHECK(res.M1.A.at(0, 0).ord(ctx).value == -1);
  CHECK(res.M2.A.at(0, 0).ord(ctx).value == 0);
  CHECK(abs(res.M2.A.at(0, 0).coeff(0) - Cplx(1)) <= Real("1e-25"));
}

TEST_CASE("spectral overlap raises") {
  // leading spectra {1} and {3}: 3 = q^1 * 1 with q = 3 -> overlap
  FormalQModule M;
  M.m = 1;
  M.q_m = Cplx(3);
  M.trunc = N;
  M.A = smat_zero<Cplx>(2, 2, 1, N);
  M.A.at(0, 0) = PuiseuxSeries::constant(1, Cplx(1), N);
  M.A.at(1, 1) = PuiseuxSeries::constant(1, Cplx(3), N);
  M.A.at(0, 1) = PuiseuxSeries::monomial(1, 1, Cplx(1), N);
  CHECK_THROWS_AS(block_split(M, 0, 1, ctx), SpectralOverlap);
}

TEST_CASE("hom vanishing (Lemma-level Sylvester chain)") {
  std::mt19937 rng(31);
  std::uniform_real_distribution<double> d(-1.0, 1.0);
  PMat A1 = smat_zero<Cplx>(2, 2, 1, N);
  PMat A2 = smat_zero<Cplx>(2, 2, 1, N);
  for (auto& s : A1.a)
    for (long k = 0; k < 6; ++k) s.add_to_coeff(k, Cplx(d(rng), d(rng)));
  for (auto& s : A2.a)
    for (long k = 0; k < 6; ++k) s.add_to_coeff(k, Cplx(d(rng), d(rng)));
  // force separated leading spectra
  A1.at(0, 0).add_to_coeff(0, Cplx(10));
  A1.at(1, 1).add_to_coeff(0, Cplx(10));
  PMat H = solve_twisted_hom(A1, A2, 0, Cplx(3), ctx);
  CHECK(smat_max_abs(H) <= Real("1e-25"));
}

TEST_CASE("fuchsian orbit split") {
  QContext qc5{Cplx(5)};
  // A(0) = diag(2,3), q=5: orbits disjoint -> two rank-1 blocks
  CMat D(2, 2, Cplx(0));
  D.at(0, 0) = 2;
  D.at(1, 1) = 3;
  FormalQModule M = module_V(1, D, qc5, N);
  M.A.at(0, 1) = PuiseuxSeries::monomial(1, 2, Cplx(1), N);  // tangle them a bit
  auto res = fuchsian_orbit_split(M, ctx);
  CHECK(res.blocks.size() == 2);

  // A(0) = diag(2, 10): same orbit (10 = 2*5) -> one rank-2 block
  CMat D2(2, 2, Cplx(0));
  D2.at(0, 0) = 2;
  D2.at(1, 1) = 10;
  FormalQModule M2 = module_V(1, D2, qc5, N);
  auto res2 = fuchsian_orbit_split(M2, ctx);
  CHECK(res2.blocks.size() == 1);
  CHECK(res2.blocks[0].block.rank() == 2);

  // rank 1 -> single block
  FormalQModule M3 = module_V1(1, Cplx(7), qc5, N);
  auto res3 = fuchsian_orbit_split(M3, ctx);
  CHECK(res3.blocks.size() == 1);

  // non-Fuchsian input
  FormalQModule L = module_L(1, Rat(1), qc5, N);
  CHECK_THROWS_AS(fuchsian_orbit_split(L, ctx), NotFuchsian);
}

TEST_CASE("tensor and dual") {
  FormalQModule L = module_L(1, Rat(1), qc3, N);
  FormalQModule LL = tensor(L, L, ctx);
  CHECK(LL.rank() == 1);
  CHECK(LL.A.at(0, 0).ord(ctx).value == -2);

  FormalQModule V2 = module_V1(1, Cplx(2), qc3, N);
  FormalQModule dV = dual(V2, ctx);
  CHECK(abs(dV.A.at(0, 0).coeff(0) - Cplx(0.5)) <= ctx.eps);

  // M tensor trivial ~ M
  FormalQModule triv = module_V1(1, Cplx(1), qc3, N);
  FormalQModule M = module_L(1, Rat(-1), qc3, N);
  FormalQModule MT = tensor(M, triv, ctx);
  CHECK(MT.rank() == 1);
  CHECK(MT.A.at(0, 0).ord(ctx).value == 1);

  // dual(dual(M)) = M on a random Fuchsian module
  std::mt19937 rng(37);
  std::uniform_real_distribution<double> d(-1.0, 1.0);
  CMat R(2, 2);
  for (auto& x : R.a) x = Cplx(d(rng), d(rng));
  R.at(0, 0) += 4;
  R.at(1, 1) += 4;
  FormalQModule W = module_V(1, R, qc3, N);
  FormalQModule WW = dual(dual(W, ctx), ctx);
  PMat diff = WW.A - W.A;
  smat_normalize(diff, ctx);
  CHECK(smat_max_abs(diff) <= Real("1e-28"));
}

TEST_CASE("pullback and pushforward") {
  // pushforward(L_2(1/2)) -> rank 2 over K_1, pure slope 1/2
  QContext qc{Cplx(3)};
  FormalQModule L12 = module_L(2, Rat(1, 2), qc, 2 * N);
  FormalQModule P = pushforward(L12, 2);
  CHECK(P.m == 1);
  CHECK(P.rank() == 2);
  // (Phi^2) matrix should be y^-1 times invertible constant
  auto det = smat_det(P.A, ctx);
  CHECK(det.ord(ctx).value == -1);

  // pullback(M, 1) = M
  FormalQModule M = module_V1(1, Cplx(2), qc, N);
  FormalQModule PM = pullback(M, 1, qc);
  CHECK(PM.m == 1);
  CHECK(PM.rank() == 1);

  // module_L(1, 1/2) built by pushforward has the expected 2x2 shape
  FormalQModule L = module_L(1, Rat(1, 2), qc, N);
  CHECK(L.rank() == 2);
  CHECK(L.A.at(1, 0).ord(ctx).value == -1);
  CHECK(L.A.at(0, 1).ord(ctx).value == 0);

  // descent(pullback(M, n)) = M for invariant matrices
  FormalQModule up = pullback(M, 3, qc);
  FormalQModule down = galois_descent(up, 3, ctx);
  CHECK(down.m == 1);
  CHECK(abs(down.A.at(0, 0).coeff(0) - Cplx(2)) <= ctx.eps);
}
