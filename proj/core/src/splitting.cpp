#include "qmt/splitting.hpp"

#include "qmt/lattice.hpp"

namespace qmt {

bool same_q_orbit(const Cplx& a, const Cplx& b, const Cplx& q, const Context& ctx,
                  const OrbitOptions& opts) {
  Real aa = abs(a), ab = abs(b);
  if (aa <= ctx.eps && ab <= ctx.eps) return true;
  if (aa <= ctx.eps || ab <= ctx.eps) return false;
  auto matches = [&](long n) {
    Cplx p(1);
    Cplx base = n >= 0 ? q : Cplx(1) / q;
    long cnt = n >= 0 ? n : -n;
    for (long i = 0; i < cnt; ++i) p *= base;
    return ctx.approx_eq(p * a, b);
  };
  Real absq = abs(q);
  if (abs(absq - 1) > ctx.eps) {
    Real nstar = (log(ab) - log(aa)) / log(absq);
    long n0 = static_cast<long>(round(nstar).convert_to<double>());
    for (long n = n0 - 1; n <= n0 + 1; ++n)
      if (matches(n)) return true;
    return false;
  }
  for (long n = -opts.n_max; n <= opts.n_max; ++n)
    if (matches(n)) return true;
  return false;
}

bool spectra_separated(const std::vector<Cplx>& sp1, const std::vector<Cplx>& sp2,
                       const Cplx& q, const Context& ctx, const OrbitOptions& opts) {
  for (const auto& a : sp1)
    for (const auto& b : sp2)
      if (same_q_orbit(a, b, q, ctx, opts)) return false;
  return true;
}

namespace {

// Solve M X q^k - X N = RHS for X (rows(M) x rows(N)).
CMat solve_sylvester(const CMat& M, const CMat& N, const Cplx& qk, const CMat& RHS, long k) {
  const int rM = M.rows, rN = N.rows;
  CMat op(rM * rN, rM * rN, Cplx(0));
  // vec(X) row-major: X_{ij}, index i*rN + j.
  // (M X)_{ij} = sum_s M_{is} X_{sj};  (X N)_{ij} = sum_t X_{it} N_{tj}
  for (int i = 0; i < rM; ++i)
    for (int j = 0; j < rN; ++j) {
      int row = i * rN + j;
      for (int s = 0; s < rM; ++s) op.at(row, s * rN + j) += qk * M.at(i, s);
      for (int t = 0; t < rN; ++t) op.at(row, i * rN + t) -= N.at(t, j);
    }
  CMat rhs(rM * rN, 1);
  for (int i = 0; i < rM; ++i)
    for (int j = 0; j < rN; ++j) rhs.at(i * rN + j, 0) = RHS.at(i, j);
  CMat x;
  try {
    x = csolve(op, rhs);
  } catch (const SingularMatrix&) {
    throw SingularSylvester("twisted Sylvester operator is singular at degree " + std::to_string(k), k);
  }
  CMat X(rM, rN);
  for (int i = 0; i < rM; ++i)
    for (int j = 0; j < rN; ++j) X.at(i, j) = x.at(i * rN + j, 0);
  return X;
}

// One-sided recursion (Eq. for G_{21}): given blocks of A = sum A_{;k} y^k
// (k >= -ell), find G21 with
//   A22(y) G21(q y) - G21(y) A11(y) + A21(y) - G21(y) A12(y) G21(q y) = 0.
// Returns coefficients G21;k for k = 1..kmax.
std::vector<CMat> solve_corner(const PMat& A11, const PMat& A12, const PMat& A21,
                               const PMat& A22, long ell, const Cplx& q, long kmax,
                               const Context& ctx) {
  const int r2 = A22.rows, r1 = A11.rows;
  CMat M0 = smat_coeff(A22, -ell);
  CMat N0 = smat_coeff(A11, -ell);
  std::vector<CMat> G(static_cast<std::size_t>(kmax + 1), CMat(r2, r1, Cplx(0)));
  std::vector<Cplx> qpow(static_cast<std::size_t>(kmax + 1), Cplx(1));
  for (long k = 1; k <= kmax; ++k) qpow[static_cast<std::size_t>(k)] = qpow[static_cast<std::size_t>(k - 1)] * q;
  for (long k = 1; k <= kmax; ++k) {
    CMat rhs(r2, r1, Cplx(0));
    // sum_{i+j = k-ell, 0 <= j < k} A22;i G;j q^j  -  G;j A11;i
    for (long j = 0; j < k; ++j) {
      long i = k - ell - j;
      CMat A22i = smat_coeff(A22, i);
      CMat A11i = smat_coeff(A11, i);
      const CMat& Gj = G[static_cast<std::size_t>(j)];
      CMat t1 = A22i * Gj;
      for (auto& v : t1.a) v *= qpow[static_cast<std::size_t>(j)];
      rhs = rhs + t1 - Gj * A11i;
    }
    // + A21;(k-ell)
    rhs = rhs + smat_coeff(A21, k - ell);
    // - sum_{i+j+p = k-ell, j > -ell, i,p >= 1} G;i A12;j G;p q^p
    for (long i = 1; i < k; ++i)
      for (long p = 1; p < k; ++p) {
        long j = k - ell - i - p;
        if (j <= -ell) continue;
        CMat A12j = smat_coeff(A12, j);
        CMat t = (G[static_cast<std::size_t>(i)] * A12j) * G[static_cast<std::size_t>(p)];
        for (auto& v : t.a) v *= qpow[static_cast<std::size_t>(p)];
        rhs = rhs - t;
      }
    // A22;-ell X q^k - X A11;-ell + rhs = 0
    G[static_cast<std::size_t>(k)] = solve_sylvester(M0, N0, qpow[static_cast<std::size_t>(k)], -rhs, k);
  }
  return G;
}

PMat coeffs_to_series_mat(const std::vector<CMat>& G, int m, long trunc) {
  const int r = G.empty() ? 0 : G.front().rows;
  const int c = G.empty() ? 0 : G.front().cols;
  PMat S = smat_zero<Cplx>(r, c, m, trunc);
  for (long k = 0; k < static_cast<long>(G.size()); ++k)
    for (int i = 0; i < r; ++i)
      for (int j = 0; j < c; ++j) S.at(i, j).add_to_coeff(k, G[static_cast<std::size_t>(k)].at(i, j));
  return S;
}

}  // namespace

BlockSplitResult block_split(const FormalQModule& M, long ell, int r1, const Context& ctx,
                             const OrbitOptions& opts) {
  const int r = M.rank();
  const int r2 = r - r1;
  if (r1 <= 0 || r2 <= 0) throw std::invalid_argument("block_split: trivial partition");
  PMat A11 = M.A.block(0, 0, r1, r1);
  PMat A12 = M.A.block(0, r1, r1, r2);
  PMat A21 = M.A.block(r1, 0, r2, r1);
  PMat A22 = M.A.block(r1, r1, r2, r2);
  if (smat_min_ord(M.A, ctx) < -ell)
    throw std::invalid_argument("block_split: matrix has a pole worse than y^-ell");
  Real off_lead = std::max(cmax_abs(smat_coeff(A12, -ell)), cmax_abs(smat_coeff(A21, -ell)));
  Real scale = std::max(Real(1), smat_max_abs(M.A));
  if (off_lead > Real(1000) * ctx.eps * scale)
    throw std::invalid_argument("block_split: off-diagonal leading blocks do not vanish");
  CMat F1 = smat_coeff(A11, -ell);
  CMat F2 = smat_coeff(A22, -ell);
  auto sp1 = eigenvalues(F1, ctx);
  auto sp2 = eigenvalues(F2, ctx);
  if (!spectra_separated(sp1, sp2, M.q_m, ctx, opts))
    throw SpectralOverlap("block_split: q^Z-orbits of leading spectra intersect");

  long tmin = smat_min_trunc(M.A);
  long kmax = tmin + ell - 1;
  if (kmax < 1) kmax = 1;
  auto G21 = solve_corner(A11, A12, A21, A22, ell, M.q_m, kmax, ctx);
  auto G12 = solve_corner(A22, A21, A12, A11, ell, M.q_m, kmax, ctx);

  PMat G = smat_identity<Cplx>(r, M.m, kmax + 1);
  G.set_block(r1, 0, coeffs_to_series_mat(G21, M.m, kmax + 1));
  G.set_block(0, r1, coeffs_to_series_mat(G12, M.m, kmax + 1));
  smat_normalize(G, ctx);

  FormalQModule gauged = gauge_transform(M, G, ctx);
  BlockSplitResult res;
  res.gauge = G;
  res.M1 = FormalQModule{M.m, M.q_m, gauged.A.block(0, 0, r1, r1), gauged.trunc};
  res.M2 = FormalQModule{M.m, M.q_m, gauged.A.block(r1, r1, r2, r2), gauged.trunc};
  return res;
}

PMat solve_twisted_hom(const PMat& A1, const PMat& A2, long ell, const Cplx& q,
                       const Context& ctx) {
  // A2(y) H(q y) = H(y) A1(y), solved degree by degree starting at k = 0.
  const int r2 = A2.rows, r1 = A1.rows;
  CMat M0 = smat_coeff(A2, -ell);
  CMat N0 = smat_coeff(A1, -ell);
  long tmin = std::min(smat_min_trunc(A1), smat_min_trunc(A2));
  long kmax = tmin + ell - 1;
  if (kmax < 0) kmax = 0;
  std::vector<CMat> H(static_cast<std::size_t>(kmax + 1), CMat(r2, r1, Cplx(0)));
  Cplx qk(1);
  for (long k = 0; k <= kmax; ++k) {
    CMat rhs(r2, r1, Cplx(0));
    Cplx qj(1);
    for (long j = 0; j < k; ++j) {
      long i = k - ell - j;
      CMat t1 = smat_coeff(A2, i) * H[static_cast<std::size_t>(j)];
      for (auto& v : t1.a) v *= qj;
      rhs = rhs + t1 - H[static_cast<std::size_t>(j)] * smat_coeff(A1, i);
      qj *= q;
    }
    H[static_cast<std::size_t>(k)] = solve_sylvester(M0, N0, qk, -rhs, k);
    qk *= q;
  }
  return coeffs_to_series_mat(H, A1.a.empty() ? 1 : A1.a.front().m, kmax + 1);
}

FuchsianSplitResult fuchsianize_and_split(const FormalQModule& M, const Context& ctx,
                                          const OrbitOptions& opts);

FuchsianSplitResult fuchsian_orbit_split(const FormalQModule& M, const Context& ctx,
                                         const OrbitOptions& opts) {
  const int r = M.rank();
  // Find a Phi-fixed lattice: saturate the standard lattice under y^0 Phi and
  // its inverse until the matrix is regular with invertible constant term.
  FormalQModule cur = M;
  PMat latt = smat_identity<Cplx>(r, M.m, M.trunc);
  PuiseuxSeries det = smat_det(M.A, ctx);
  Ord dord = det.ord(ctx);
  if (dord.infinite()) throw NotFuchsian("Phi matrix is singular to truncation");
  if (dord.value != 0) throw NotFuchsian("det Phi has nonzero order: module is not Fuchsian");
  long mino = smat_min_ord(M.A, ctx);
  if (mino < 0 || cmax_abs(smat_coeff(M.A, 0)).is_zero() ||
      abs(cdet(smat_coeff(M.A, 0))) <= Real(1000) * ctx.eps) {
    // saturate L <- L + Phi L (bounded); with slope 0 and det order 0 this
    // stabilizes on a Phi-fixed lattice if one exists.
    auto apply = [&](const SeriesVec& col) { return apply_phi(M, col, ctx); };
    try {
      latt = lattice_saturate<Cplx>(latt, apply, ctx, 4 * r + 4);
    } catch (const std::exception&) {
      throw NotFuchsian("no Phi-fixed lattice found within saturation budget");
    }
    cur = gauge_transform(M, latt, ctx);
    if (smat_min_ord(cur.A, ctx) < 0 || abs(cdet(smat_coeff(cur.A, 0))) <= Real(1000) * ctx.eps)
      throw NotFuchsian("saturated lattice is not Phi-fixed");
  }
  return fuchsianize_and_split(cur, ctx, opts);
}

FuchsianSplitResult fuchsianize_and_split(const FormalQModule& M, const Context& ctx,
                                          const OrbitOptions& opts) {
  const int r = M.rank();
  CMat F = smat_coeff(M.A, 0);
  auto eigs = eigenvalues(F, ctx);
  auto clusters = cluster_eigenvalues(eigs, ctx, cmax_abs(F));
  // group clusters into q^Z-orbits
  std::vector<int> group(clusters.size(), -1);
  int ngroups = 0;
  for (std::size_t i = 0; i < clusters.size(); ++i) {
    if (group[i] >= 0) continue;
    group[i] = ngroups++;
    for (std::size_t j = i + 1; j < clusters.size(); ++j)
      if (group[j] < 0 && same_q_orbit(clusters[i].value, clusters[j].value, M.q_m, ctx, opts))
        group[j] = group[i];
  }

  FuchsianSplitResult res;
  res.lattice = smat_identity<Cplx>(r, M.m, M.trunc);
  if (ngroups == 1) {
    res.blocks.push_back({clusters.front().value, M});
    res.gauge = smat_identity<Cplx>(r, M.m, M.trunc);
    return res;
  }

  // Constant basis change: group generalized eigenspaces.
  CMat S(r, r, Cplx(0));
  std::vector<std::pair<int, Cplx>> group_info;  // (size, representative)
  int col = 0;
  for (int g = 0; g < ngroups; ++g) {
    int size_g = 0;
    Cplx rep(0);
    bool first = true;
    for (std::size_t i = 0; i < clusters.size(); ++i) {
      if (group[i] != g) continue;
      if (first) {
        rep = clusters[i].value;
        first = false;
      }
      CMat V = generalized_eigenspace(F, clusters[i].value, ctx);
      for (int j = 0; j < V.cols; ++j, ++col)
        for (int i2 = 0; i2 < r; ++i2) S.at(i2, col) = V.at(i2, j);
      size_g += V.cols;
    }
    group_info.push_back({size_g, rep});
  }
  if (col != r) throw NotFuchsian("generalized eigenspaces do not fill the fibre");
  PMat Sm = smat_from_const(S, M.m, M.trunc);
  FormalQModule cur = gauge_transform(M, Sm, ctx);
  PMat total_gauge = Sm;

  // Peel groups off one by one with the splitting recursion (ell = 0).
  int offset = 0;
  for (std::size_t g = 0; g + 1 < group_info.size(); ++g) {
    int r1 = group_info[g].first;
    BlockSplitResult bs = block_split(cur, 0, r1, ctx, opts);
    res.blocks.push_back({group_info[g].second, bs.M1});
    // embed the gauge into the full frame
    PMat embed = smat_identity<Cplx>(r, M.m, smat_min_trunc(bs.gauge));
    embed.set_block(offset, offset, bs.gauge);
    total_gauge = total_gauge * embed;
    cur = bs.M2;
    offset += r1;
    // The remaining gauge acts on the trailing block only; rebuild "cur" as a
    // standalone module (bs.M2 already is).
  }
  res.blocks.push_back({group_info.back().second, cur});
  res.gauge = total_gauge;
  return res;
}

}  // namespace qmt
