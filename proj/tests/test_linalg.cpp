#include <random>

#include "doctest.h"
#include "qmt/eigen.hpp"
#include "qmt/lattice.hpp"

using namespace qmt;

namespace {
Context ctx;

CMat random_cmat(std::mt19937& rng, int n) {
  std::uniform_real_distribution<double> d(-1.0, 1.0);
  CMat A(n, n);
  for (auto& x : A.a) x = Cplx(d(rng), d(rng));
  return A;
}
}  // namespace

TEST_CASE("csolve and cinverse") {
  std::mt19937 rng(5);
  CMat A = random_cmat(rng, 4);
  CMat I = cmat_identity(4);
  CMat Ainv = cinverse(A);
  CMat P = A * Ainv;
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) CHECK(abs(P.at(i, j) - I.at(i, j)) <= Real("1e-30"));
}

TEST_CASE("eigenvalues of companion-style matrices") {
  // roots of T^3 - 6T^2 + 11T - 6 = (T-1)(T-2)(T-3)
  CMat A(3, 3, Cplx(0));
  A.at(0, 2) = 6;
  A.at(1, 2) = -11;
  A.at(2, 2) = 6;
  A.at(1, 0) = 1;
  A.at(2, 1) = 1;
  auto eigs = eigenvalues(A, ctx);
  std::vector<double> re;
  for (auto& e : eigs) {
    re.push_back(e.real().convert_to<double>());
    CHECK(abs(e.imag()) <= Real("1e-30"));
  }
  std::sort(re.begin(), re.end());
  CHECK(re[0] == doctest::Approx(1.0).epsilon(1e-25));
  CHECK(re[1] == doctest::Approx(2.0).epsilon(1e-25));
  CHECK(re[2] == doctest::Approx(3.0).epsilon(1e-25));
}

TEST_CASE("eigenvalues: random similarity of known diagonal") {
  std::mt19937 rng(9);
  std::vector<Cplx> diag = {Cplx(2, 1), Cplx(-1, 0.5), Cplx(0.25, -3), Cplx(4, 0)};
  CMat D(4, 4, Cplx(0));
  for (int i = 0; i < 4; ++i) D.at(i, i) = diag[static_cast<std::size_t>(i)];
  CMat S = random_cmat(rng, 4);
  CMat A = S * D * cinverse(S);
  auto eigs = eigenvalues(A, ctx);
  REQUIRE(eigs.size() == 4);
  for (auto& want : diag) {
    Real best = 1;
    for (auto& got : eigs) best = std::min(best, abs(got - want));
    CHECK(best <= Real("1e-28"));
  }
}

TEST_CASE("jordan partition of nilpotent matrices") {
  CMat N(4, 4, Cplx(0));
  N.at(1, 0) = 1;
  N.at(2, 1) = 1;  // block of size 3 on {0,1,2}, size 1 on {3}
  auto part = nilpotent_jordan_partition(N, ctx);
  REQUIRE(part.size() == 2);
  CHECK(part[0] == 3);
  CHECK(part[1] == 1);

  CMat Z(3, 3, Cplx(0));
  auto pz = nilpotent_jordan_partition(Z, ctx);
  CHECK(pz == std::vector<int>({1, 1, 1}));

  CMat M = cmat_identity(2);
  CHECK_THROWS_AS(nilpotent_jordan_partition(M, ctx), NotNilpotent);
}

TEST_CASE("fitting decomposition") {
  // A = diag(2, 0-Jordan-block): invertible rank 1, nilpotent rank 2
  CMat A(3, 3, Cplx(0));
  A.at(0, 0) = 2;
  A.at(2, 1) = 1;
  auto fs = fitting_decomposition(A, ctx);
  CHECK(fs.invertible_part.cols == 1);
  CHECK(fs.nilpotent_part.cols == 2);
}

TEST_CASE("series matrix solve and det") {
  std::mt19937 rng(13);
  std::uniform_real_distribution<double> d(-1.0, 1.0);
  PMat A = smat_zero<Cplx>(3, 3, 1, 10);
  for (auto& s : A.a)
    for (long k = -1; k < 6; ++k) s.add_to_coeff(k, Cplx(d(rng), d(rng)));
  PMat I = smat_identity<Cplx>(3, 1, 10);
  PMat Ainv = smat_inverse(A, ctx);
  PMat P = A * Ainv;
  smat_normalize(P, ctx);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      PuiseuxSeries diff = P.at(i, j) - I.at(i, j);
      for (const auto& c : diff.c) CHECK(abs(c) <= Real("1e-28"));
    }
  // det multiplicativity on a 2x2 pair
  PMat B = smat_zero<Cplx>(2, 2, 1, 8), C = smat_zero<Cplx>(2, 2, 1, 8);
  for (auto& s : B.a)
    for (long k = 0; k < 4; ++k) s.add_to_coeff(k, Cplx(d(rng), d(rng)));
  for (auto& s : C.a)
    for (long k = 0; k < 4; ++k) s.add_to_coeff(k, Cplx(d(rng), d(rng)));
  auto dBC = smat_det(B * C, ctx);
  auto dBdC = smat_det(B, ctx) * smat_det(C, ctx);
  auto diff = dBC - dBdC;
  diff.normalize(ctx);
  for (const auto& c : diff.c) CHECK(abs(c) <= Real("1e-28"));
}

TEST_CASE("lattice reduce and smith orders") {
  // generators: columns y^-1 e1, e1, e2  ->  basis ~ (y^-1 e1, e2)
  PMat G = smat_zero<Cplx>(2, 3, 1, 8);
  G.at(0, 0) = PuiseuxSeries::monomial(1, -1, Cplx(1), 8);
  G.at(0, 1) = PuiseuxSeries::constant(1, Cplx(1), 8);
  G.at(1, 2) = PuiseuxSeries::constant(1, Cplx(1), 8);
  PMat B = lattice_reduce(G, ctx);
  CHECK(B.cols == 2);
  auto det = smat_det(B, ctx);
  CHECK(det.ord(ctx).value == -1);

  // smith orders of diag(y, y^-1) conjugated by a unimodular matrix
  PMat T = smat_zero<Cplx>(2, 2, 1, 8);
  T.at(0, 0) = PuiseuxSeries::monomial(1, 1, Cplx(1), 8);
  T.at(1, 1) = PuiseuxSeries::monomial(1, -1, Cplx(1), 8);
  PMat U = smat_identity<Cplx>(2, 1, 8);
  U.at(0, 1) = PuiseuxSeries::constant(1, Cplx(3), 8);
  PMat TU = U * T;
  auto orders = smith_orders(TU, ctx);
  REQUIRE(orders.size() == 2);
  CHECK(orders[0] == -1);
  CHECK(orders[1] == 1);
}
