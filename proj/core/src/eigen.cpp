#include "qmt/eigen.hpp"

#include <algorithm>
#include <cmath>

namespace qmt {

Real pi_const() {
  static const Real pi = mp::default_ops::get_constant_pi<Real::backend_type>();
  return pi;
}

// ---------------------------------------------------------------------------
// Dense solve / rank / kernel.

CMat csolve(CMat A, CMat B) {
  const int n = A.rows;
  for (int step = 0; step < n; ++step) {
    int pi = step;
    Real best = abs(A.at(step, step));
    for (int i = step + 1; i < n; ++i)
      if (abs(A.at(i, step)) > best) {
        best = abs(A.at(i, step));
        pi = i;
      }
    if (best == 0) throw SingularMatrix("csolve: singular matrix");
    if (pi != step) {
      for (int j = 0; j < n; ++j) std::swap(A.at(pi, j), A.at(step, j));
      for (int j = 0; j < B.cols; ++j) std::swap(B.at(pi, j), B.at(step, j));
    }
    Cplx inv = Cplx(1) / A.at(step, step);
    for (int j = step; j < n; ++j) A.at(step, j) *= inv;
    for (int j = 0; j < B.cols; ++j) B.at(step, j) *= inv;
    for (int i = 0; i < n; ++i) {
      if (i == step) continue;
      Cplx f = A.at(i, step);
      if (f == Cplx(0)) continue;
      for (int j = step; j < n; ++j) A.at(i, j) -= f * A.at(step, j);
      for (int j = 0; j < B.cols; ++j) B.at(i, j) -= f * B.at(step, j);
    }
  }
  return B;
}

CMat cinverse(const CMat& A) { return csolve(A, cmat_identity(A.rows)); }

Cplx cdet(CMat A) {
  const int n = A.rows;
  Cplx det(1);
  for (int step = 0; step < n; ++step) {
    int pi = step;
    Real best = abs(A.at(step, step));
    for (int i = step + 1; i < n; ++i)
      if (abs(A.at(i, step)) > best) {
        best = abs(A.at(i, step));
        pi = i;
      }
    if (best == 0) return Cplx(0);
    if (pi != step) {
      for (int j = 0; j < n; ++j) std::swap(A.at(pi, j), A.at(step, j));
      det = -det;
    }
    det *= A.at(step, step);
    Cplx inv = Cplx(1) / A.at(step, step);
    for (int i = step + 1; i < n; ++i) {
      Cplx f = A.at(i, step) * inv;
      if (f == Cplx(0)) continue;
      for (int j = step; j < n; ++j) A.at(i, j) -= f * A.at(step, j);
    }
  }
  return det;
}

Real cmax_abs(const CMat& A) {
  Real r = 0;
  for (const auto& x : A.a) r = std::max(r, abs(x));
  return r;
}

namespace {

// Row echelon with column pivoting; returns rank, records pivot columns.
int echelon(CMat& A, const Real& tol, std::vector<int>* pivot_cols) {
  int rank = 0;
  for (int col = 0; col < A.cols && rank < A.rows; ++col) {
    int pi = -1;
    Real best = tol;
    for (int i = rank; i < A.rows; ++i)
      if (abs(A.at(i, col)) > best) {
        best = abs(A.at(i, col));
        pi = i;
      }
    if (pi < 0) continue;
    if (pi != rank)
      for (int j = 0; j < A.cols; ++j) std::swap(A.at(pi, j), A.at(rank, j));
    Cplx inv = Cplx(1) / A.at(rank, col);
    for (int j = col; j < A.cols; ++j) A.at(rank, j) *= inv;
    for (int i = 0; i < A.rows; ++i) {
      if (i == rank) continue;
      Cplx f = A.at(i, col);
      if (abs(f) == 0) continue;
      for (int j = col; j < A.cols; ++j) A.at(i, j) -= f * A.at(rank, j);
    }
    if (pivot_cols) pivot_cols->push_back(col);
    ++rank;
  }
  return rank;
}

}  // namespace

int crank(CMat A, const Real& tol) {
  Real scale = cmax_abs(A);
  if (scale == 0) return 0;
  return echelon(A, tol * scale, nullptr);
}

CMat ckernel(CMat A, const Real& tol) {
  Real scale = cmax_abs(A);
  std::vector<int> piv;
  int rank = scale == 0 ? 0 : echelon(A, tol * std::max(Real(1), scale), &piv);
  std::vector<char> is_piv(static_cast<std::size_t>(A.cols), 0);
  for (int p : piv) is_piv[static_cast<std::size_t>(p)] = 1;
  CMat K(A.cols, A.cols - rank, Cplx(0));
  int kcol = 0;
  for (int free = 0; free < A.cols; ++free) {
    if (is_piv[static_cast<std::size_t>(free)]) continue;
    K.at(free, kcol) = 1;
    for (int r = 0; r < rank; ++r) K.at(piv[static_cast<std::size_t>(r)], kcol) = -A.at(r, free);
    ++kcol;
  }
  // normalize columns: badly scaled bases destabilize downstream recursions
  for (int j = 0; j < K.cols; ++j) {
    Real mx = 0;
    for (int i = 0; i < K.rows; ++i) mx = std::max(mx, abs(K.at(i, j)));
    if (mx > 0)
      for (int i = 0; i < K.rows; ++i) K.at(i, j) /= mx;
  }
  return K;
}

// ---------------------------------------------------------------------------
// Eigenvalues: Hessenberg + shifted QR with Givens rotations.

namespace {

void hessenberg(CMat& H) {
  const int n = H.rows;
  for (int k = 0; k < n - 2; ++k) {
    // zero H(k+2..n-1, k) with Householder on rows k+1..n-1
    Real colnorm = 0;
    for (int i = k + 1; i < n; ++i) colnorm += norm(H.at(i, k));
    colnorm = sqrt(colnorm);
    if (colnorm == 0) continue;
    Cplx alpha = H.at(k + 1, k);
    Cplx phase = abs(alpha) == 0 ? Cplx(1) : alpha / abs(alpha);
    Cplx v0 = alpha + phase * colnorm;
    std::vector<Cplx> v(static_cast<std::size_t>(n), Cplx(0));
    v[static_cast<std::size_t>(k + 1)] = v0;
    for (int i = k + 2; i < n; ++i) v[static_cast<std::size_t>(i)] = H.at(i, k);
    Real vnorm2 = 0;
    for (int i = k + 1; i < n; ++i) vnorm2 += norm(v[static_cast<std::size_t>(i)]);
    if (vnorm2 == 0) continue;
    // H <- (I - 2 v v^H / |v|^2) H ; then H <- H (I - 2 v v^H / |v|^2)
    for (int j = 0; j < n; ++j) {
      Cplx dot(0);
      for (int i = k + 1; i < n; ++i) dot += conj(v[static_cast<std::size_t>(i)]) * H.at(i, j);
      dot = 2 * dot / vnorm2;
      for (int i = k + 1; i < n; ++i) H.at(i, j) -= dot * v[static_cast<std::size_t>(i)];
    }
    for (int i = 0; i < n; ++i) {
      Cplx dot(0);
      for (int j = k + 1; j < n; ++j) dot += H.at(i, j) * v[static_cast<std::size_t>(j)];
      dot = 2 * dot / vnorm2;
      for (int j = k + 1; j < n; ++j) H.at(i, j) -= dot * conj(v[static_cast<std::size_t>(j)]);
    }
  }
}

Real abs_of(const Cplx& c) { return abs(c); }

}  // namespace

std::vector<Cplx> eigenvalues(CMat A, const Context& ctx) {
  const int n = A.rows;
  std::vector<Cplx> eigs;
  if (n == 0) return eigs;
  if (n == 1) return {A.at(0, 0)};
  Real scale = cmax_abs(A);
  if (scale == 0) return std::vector<Cplx>(static_cast<std::size_t>(n), Cplx(0));
  hessenberg(A);
  Real tol = ctx.eps * ctx.eps;  // subdiagonal deflation threshold (relative)
  // Guard: eps^2 may underflow usefulness; use 2^-120 relative floor.
  Real floor_tol = pow(Real(2), -120);
  if (tol < floor_tol) tol = floor_tol;

  int hi = n - 1;
  int iter_budget = 200 * n;
  while (hi > 0 && iter_budget-- > 0) {
    // deflate
    int lo = hi;
    while (lo > 0) {
      Real off = abs(A.at(lo, lo - 1));
      Real diag = abs_of(A.at(lo, lo)) + abs_of(A.at(lo - 1, lo - 1));
      if (diag == 0) diag = scale;
      if (off <= tol * diag) {
        A.at(lo, lo - 1) = 0;
        break;
      }
      --lo;
    }
    if (lo == hi) {
      eigs.push_back(A.at(hi, hi));
      --hi;
      continue;
    }
    // Wilkinson shift from trailing 2x2 of the active block [lo..hi]
    Cplx a = A.at(hi - 1, hi - 1), b = A.at(hi - 1, hi), c = A.at(hi, hi - 1), d = A.at(hi, hi);
    Cplx tr = a + d;
    Cplx disc = sqrt(tr * tr - 4 * (a * d - b * c));
    Cplx mu1 = (tr + disc) / 2, mu2 = (tr - disc) / 2;
    Cplx shift = (abs(mu1 - d) < abs(mu2 - d)) ? mu1 : mu2;
    // Explicit shifted QR step on the active block: A <- Q^H (A - s) Q + s.
    for (int i = lo; i <= hi; ++i) A.at(i, i) -= shift;
    std::vector<std::pair<Cplx, Cplx>> rot(static_cast<std::size_t>(hi + 1), {Cplx(1), Cplx(0)});
    for (int k = lo; k < hi; ++k) {
      Cplx x = A.at(k, k), y = A.at(k + 1, k);
      Real r = sqrt(norm(x) + norm(y));
      Cplx cs(1), sn(0);
      if (r != 0) {
        cs = x / r;
        sn = y / r;
      }
      rot[static_cast<std::size_t>(k)] = {cs, sn};
      for (int j = k; j <= hi; ++j) {
        Cplx t1 = A.at(k, j), t2 = A.at(k + 1, j);
        A.at(k, j) = conj(cs) * t1 + conj(sn) * t2;
        A.at(k + 1, j) = -sn * t1 + cs * t2;
      }
    }
    for (int k = lo; k < hi; ++k) {
      auto [cs, sn] = rot[static_cast<std::size_t>(k)];
      for (int i = lo; i <= std::min(hi, k + 2); ++i) {
        Cplx t1 = A.at(i, k), t2 = A.at(i, k + 1);
        A.at(i, k) = t1 * cs + t2 * sn;
        A.at(i, k + 1) = -t1 * conj(sn) + t2 * conj(cs);
      }
    }
    for (int i = lo; i <= hi; ++i) A.at(i, i) += shift;
  }
  if (hi == 0) eigs.push_back(A.at(0, 0));
  if (static_cast<int>(eigs.size()) != n)
    throw std::runtime_error("eigenvalues: QR iteration did not converge");
  std::reverse(eigs.begin(), eigs.end());
  return eigs;
}

std::vector<EigenCluster> cluster_eigenvalues(const std::vector<Cplx>& eigs,
                                              const Context& ctx, Real scale) {
  if (scale == 0) scale = 1;
  Real radius = Real(1000) * ctx.eps * scale;
  std::vector<EigenCluster> out;
  std::vector<char> used(eigs.size(), 0);
  for (std::size_t i = 0; i < eigs.size(); ++i) {
    if (used[i]) continue;
    Cplx sum = eigs[i];
    int cnt = 1;
    used[i] = 1;
    bool grew = true;
    std::vector<std::size_t> members{i};
    while (grew) {
      grew = false;
      for (std::size_t j = 0; j < eigs.size(); ++j) {
        if (used[j]) continue;
        for (std::size_t k : members) {
          if (abs(eigs[j] - eigs[k]) <= radius) {
            used[j] = 1;
            members.push_back(j);
            sum += eigs[j];
            ++cnt;
            grew = true;
            break;
          }
        }
      }
    }
    out.push_back({sum / cnt, cnt});
  }
  return out;
}

CMat generalized_eigenspace(const CMat& A, const Cplx& lambda, const Context& ctx) {
  const int n = A.rows;
  CMat B = A;
  for (int i = 0; i < n; ++i) B.at(i, i) -= lambda;
  CMat P = cmat_identity(n);
  for (int k = 0; k < n; ++k) P = P * B;
  return ckernel(P, Real(1000) * ctx.eps);
}

FittingSplit fitting_decomposition(const CMat& A, const Context& ctx) {
  const int n = A.rows;
  CMat P = cmat_identity(n);
  for (int k = 0; k < n; ++k) P = P * A;
  Real tol = Real(1000) * ctx.eps;
  CMat nil = ckernel(P, tol);
  // image basis: pivot columns of P
  CMat E = P;
  std::vector<int> piv;
  Real scale = cmax_abs(E);
  if (scale != 0) echelon(E, tol * std::max(Real(1), scale), &piv);
  CMat inv(n, static_cast<int>(piv.size()), Cplx(0));
  for (std::size_t j = 0; j < piv.size(); ++j) {
    Real mx = 0;
    for (int i = 0; i < n; ++i) mx = std::max(mx, abs(P.at(i, piv[j])));
    for (int i = 0; i < n; ++i)
      inv.at(i, static_cast<int>(j)) = mx > 0 ? P.at(i, piv[j]) / mx : P.at(i, piv[j]);
  }
  return {inv, nil};
}

std::vector<int> nilpotent_jordan_partition(const CMat& N, const Context& ctx) {
  const int n = N.rows;
  Real tol = Real(1000) * ctx.eps;
  Real scale = std::max(Real(1), cmax_abs(N));
  CMat P = cmat_identity(n);
  std::vector<int> ranks;  // rank of N^j, j = 0..n
  ranks.push_back(n);
  for (int j = 1; j <= n; ++j) {
    P = P * N;
    ranks.push_back(crank(P, tol));
  }
  if (ranks.back() != 0) throw NotNilpotent("matrix is not nilpotent to tolerance");
  // number of blocks of size >= j is ranks[j-1] - ranks[j]
  std::vector<int> partition;
  for (int j = 1; j <= n; ++j) {
    int ge_j = ranks[static_cast<std::size_t>(j - 1)] - ranks[static_cast<std::size_t>(j)];
    int ge_j1 = (j + 1 <= n) ? ranks[static_cast<std::size_t>(j)] - ranks[static_cast<std::size_t>(j + 1)] : 0;
    int exactly_j = ge_j - ge_j1;
    for (int t = 0; t < exactly_j; ++t) partition.push_back(j);
  }
  std::sort(partition.rbegin(), partition.rend());
  (void)scale;
  return partition;
}

std::vector<int> jordan_partition_at(const CMat& A, const Cplx& lambda, const Context& ctx) {
  CMat V = generalized_eigenspace(A, lambda, ctx);
  const int d = V.cols;
  if (d == 0) return {};
  // Restrict A - lambda to span(V):  (A - lambda) V = V N  =>  solve for N.
  CMat B = A;
  for (int i = 0; i < B.rows; ++i) B.at(i, i) -= lambda;
  CMat AV = B * V;
  // Least squares via normal equations (V has full column rank).
  CMat VH(V.cols, V.rows);
  for (int i = 0; i < V.rows; ++i)
    for (int j = 0; j < V.cols; ++j) VH.at(j, i) = conj(V.at(i, j));
  CMat N = csolve(VH * V, VH * AV);
  return nilpotent_jordan_partition(N, ctx);
}

CMat unipotent_log(const CMat& U, const Context& ctx) {
  const int n = U.rows;
  CMat N = U;
  for (int i = 0; i < n; ++i) N.at(i, i) -= 1;
  // log(1+N) = sum (-1)^{k+1} N^k / k, nilpotent so finite
  CMat res(n, n, Cplx(0));
  CMat P = cmat_identity(n);
  for (int k = 1; k <= n; ++k) {
    P = P * N;
    Cplx coeff = Cplx((k % 2 == 1) ? 1 : -1) / Cplx(k);
    for (std::size_t i = 0; i < res.a.size(); ++i) res.a[i] += coeff * P.a[i];
  }
  (void)ctx;
  return res;
}

CMat nilpotent_exp(const CMat& N) {
  const int n = N.rows;
  CMat res = cmat_identity(n);
  CMat P = cmat_identity(n);
  Real fact = 1;
  for (int k = 1; k <= n; ++k) {
    P = P * N;
    fact *= k;
    for (std::size_t i = 0; i < res.a.size(); ++i) res.a[i] += P.a[i] / fact;
  }
  return res;
}

}  // namespace qmt
