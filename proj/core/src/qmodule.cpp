#include "qmt/qmodule.hpp"

namespace qmt {

SeriesVec apply_phi(const FormalQModule& M, const SeriesVec& v, const Context& ctx) {
  if (static_cast<int>(v.size()) != M.rank())
    throw std::invalid_argument("apply_phi: dimension mismatch");
  SeriesVec out(v.size(), PuiseuxSeries::zero(M.m, M.trunc));
  for (int i = 0; i < M.rank(); ++i) {
    PuiseuxSeries acc = M.A.at(i, 0) * v[0].scaled_variable(M.q_m);
    for (int j = 1; j < M.rank(); ++j)
      acc += M.A.at(i, j) * v[static_cast<std::size_t>(j)].scaled_variable(M.q_m);
    acc.normalize(ctx);
    out[static_cast<std::size_t>(i)] = acc;
  }
  return out;
}

FormalQModule direct_sum(const FormalQModule& M1, const FormalQModule& M2) {
  if (M1.m != M2.m) throw IncompatibleRoots("direct_sum: different ramification");
  FormalQModule r;
  r.m = M1.m;
  r.q_m = M1.q_m;
  r.trunc = std::min(M1.trunc, M2.trunc);
  int n1 = M1.rank(), n2 = M2.rank();
  r.A = smat_zero<Cplx>(n1 + n2, n1 + n2, r.m, r.trunc);
  r.A.set_block(0, 0, M1.A);
  r.A.set_block(n1, n1, M2.A);
  return r;
}

FormalQModule tensor(const FormalQModule& M1, const FormalQModule& M2, const Context& ctx) {
  if (M1.m != M2.m || !ctx.approx_eq(M1.q_m, M2.q_m))
    throw IncompatibleRoots("tensor: incompatible (m, q_m)");
  FormalQModule r;
  r.m = M1.m;
  r.q_m = M1.q_m;
  r.trunc = std::min(M1.trunc, M2.trunc);
  r.A = kron(M1.A, M2.A);
  smat_normalize(r.A, ctx);
  return r;
}

FormalQModule dual(const FormalQModule& M, const Context& ctx) {
  FormalQModule r = M;
  r.A = smat_inverse(M.A.transposed(), ctx);
  return r;
}

FormalQModule gauge_transform(const FormalQModule& M, const PMat& G, const Context& ctx) {
  FormalQModule r = M;
  PMat Ginv = smat_inverse(G, ctx);
  r.A = Ginv * (M.A * smat_sigma(G, M.q_m));
  smat_normalize(r.A, ctx);
  r.trunc = smat_min_trunc(r.A);
  return r;
}

FormalQModule pullback(const FormalQModule& M, int n, const QContext& qc) {
  if (n < 1) throw std::invalid_argument("pullback: n must be positive");
  FormalQModule r;
  r.m = M.m * n;
  r.q_m = qc.root(r.m);
  r.trunc = M.trunc >= kOrdInfinity ? M.trunc : M.trunc * n;
  r.A = PMat(M.A.rows, M.A.cols);
  for (int i = 0; i < M.A.rows; ++i)
    for (int j = 0; j < M.A.cols; ++j) r.A.at(i, j) = M.A.at(i, j).embedded(n);
  return r;
}

FormalQModule pushforward(const FormalQModule& M, int n) {
  if (n < 1 || M.m % n != 0) throw IncompatibleRoots("pushforward: n must divide m");
  if (n == 1) return M;
  const int r0 = M.rank();
  FormalQModule r;
  r.m = M.m / n;
  // q_{m/n} = q_m^n
  Cplx qn(1);
  for (int i = 0; i < n; ++i) qn *= M.q_m;
  r.q_m = qn;
  auto fdiv = [](long a, long b) { return a >= 0 ? a / b : -((-a + b - 1) / b); };
  r.trunc = M.trunc >= kOrdInfinity ? M.trunc : fdiv(M.trunc - n, n) + 1;
  // Basis e_i y_m^j (i = 0..r0-1, j = 0..n-1), index i*n + j.
  r.A = smat_zero<Cplx>(r0 * n, r0 * n, r.m, r.trunc);
  for (int i = 0; i < r0; ++i) {
    for (int j = 0; j < n; ++j) {
      // Phi(e_i y^j) = q_m^j y^j sum_k A_{ki} e_k
      Cplx qj(1);
      for (int t = 0; t < j; ++t) qj *= M.q_m;
      for (int k = 0; k < r0; ++k) {
        const PuiseuxSeries& s = M.A.at(k, i);
        for (std::size_t ci = 0; ci < s.c.size(); ++ci) {
          long e = s.lo + static_cast<long>(ci) + j;  // exponent in y_m
          long down = e >= 0 ? e / n : -((-e + n - 1) / n);
          long jp = e - down * n;  // in [0, n)
          r.A.at(k * n + static_cast<int>(jp), i * n + j)
              .add_to_coeff(down, qj * s.c[ci]);
        }
      }
    }
  }
  return r;
}

FormalQModule galois_descent(const FormalQModule& M, int n, const Context& ctx) {
  if (n < 1 || M.m % n != 0) throw IncompatibleRoots("galois_descent: n must divide m");
  if (n == 1) return M;
  FormalQModule r;
  r.m = M.m / n;
  Cplx qn(1);
  for (int i = 0; i < n; ++i) qn *= M.q_m;  // q_{m/n} = q_m^n
  r.q_m = qn;
  r.trunc = M.trunc >= kOrdInfinity ? M.trunc : (M.trunc + n - 1) / n;
  r.A = PMat(M.A.rows, M.A.cols);
  for (int i = 0; i < M.A.rows; ++i)
    for (int j = 0; j < M.A.cols; ++j) {
      const PuiseuxSeries& s = M.A.at(i, j);
      PuiseuxSeries d = PuiseuxSeries::zero(r.m, r.trunc);
      for (std::size_t ci = 0; ci < s.c.size(); ++ci) {
        long e = s.lo + static_cast<long>(ci);
        if (ScalarTraits<Cplx>::negligible(s.c[ci], ctx.eps)) continue;
        if (e % n != 0)
          throw IncompatibleRoots("galois_descent: matrix is not Galois invariant");
        d.add_to_coeff(e / n, s.c[ci]);
      }
      r.A.at(i, j) = d;
    }
  return r;
}

FormalQModule module_L(int m, Rat omega, const QContext& qc, long trunc) {
  Rat mw = Rat(m) * omega;
  if (mw.is_integer()) {
    FormalQModule r;
    r.m = m;
    r.q_m = qc.root(m);
    r.trunc = trunc;
    r.A = smat_zero<Cplx>(1, 1, m, trunc);
    r.A.at(0, 0) = PuiseuxSeries::monomial(m, -mw.num, Cplx(1), trunc);
    return r;
  }
  long k = mw.den;
  FormalQModule up = module_L(static_cast<int>(k) * m, omega, qc, trunc * k);
  return pushforward(up, static_cast<int>(k));
}

FormalQModule module_V(int m, const CMat& A0, const QContext& qc, long trunc) {
  FormalQModule r;
  r.m = m;
  r.q_m = qc.root(m);
  r.trunc = trunc;
  r.A = smat_from_const(A0, m, trunc);
  return r;
}

FormalQModule module_V1(int m, const Cplx& alpha, const QContext& qc, long trunc) {
  CMat a(1, 1);
  a.at(0, 0) = alpha;
  return module_V(m, a, qc, trunc);
}

}  // namespace qmt
