#pragma once

#include <cassert>
#include <stdexcept>
#include <vector>

#include "qmt/series.hpp"

namespace qmt {

template <class T>
struct Mat {
  int rows = 0;
  int cols = 0;
  std::vector<T> a;

  Mat() = default;
  Mat(int r, int c) : rows(r), cols(c), a(static_cast<std::size_t>(r) * c) {}
  Mat(int r, int c, T fill) : rows(r), cols(c), a(static_cast<std::size_t>(r) * c, fill) {}

  T& at(int i, int j) { return a[static_cast<std::size_t>(i) * cols + j]; }
  const T& at(int i, int j) const { return a[static_cast<std::size_t>(i) * cols + j]; }

  Mat transposed() const {
    Mat r(cols, rows);
    for (int i = 0; i < rows; ++i)
      for (int j = 0; j < cols; ++j) r.at(j, i) = at(i, j);
    return r;
  }

  Mat block(int i0, int j0, int r, int c) const {
    Mat b(r, c);
    for (int i = 0; i < r; ++i)
      for (int j = 0; j < c; ++j) b.at(i, j) = at(i0 + i, j0 + j);
    return b;
  }

  void set_block(int i0, int j0, const Mat& b) {
    for (int i = 0; i < b.rows; ++i)
      for (int j = 0; j < b.cols; ++j) at(i0 + i, j0 + j) = b.at(i, j);
  }

  std::vector<T> col(int j) const {
    std::vector<T> v(static_cast<std::size_t>(rows));
    for (int i = 0; i < rows; ++i) v[static_cast<std::size_t>(i)] = at(i, j);
    return v;
  }

  friend Mat operator+(const Mat& x, const Mat& y) {
    Mat r(x.rows, x.cols);
    for (std::size_t i = 0; i < r.a.size(); ++i) r.a[i] = x.a[i] + y.a[i];
    return r;
  }
  friend Mat operator-(const Mat& x, const Mat& y) {
    Mat r(x.rows, x.cols);
    for (std::size_t i = 0; i < r.a.size(); ++i) r.a[i] = x.a[i] - y.a[i];
    return r;
  }
  Mat operator-() const {
    Mat r(rows, cols);
    for (std::size_t i = 0; i < a.size(); ++i) r.a[i] = -a[i];
    return r;
  }
  friend Mat operator*(const Mat& x, const Mat& y) {
    assert(x.cols == y.rows);
    Mat r(x.rows, y.cols);
    for (int i = 0; i < x.rows; ++i)
      for (int j = 0; j < y.cols; ++j) {
        T acc = x.at(i, 0) * y.at(0, j);
        for (int k = 1; k < x.cols; ++k) acc += x.at(i, k) * y.at(k, j);
        r.at(i, j) = std::move(acc);
      }
    return r;
  }
};

using CMat = Mat<Cplx>;

inline CMat cmat_identity(int r) {
  CMat m(r, r, Cplx(0));
  for (int i = 0; i < r; ++i) m.at(i, i) = 1;
  return m;
}

// Kronecker product.
template <class T>
Mat<T> kron(const Mat<T>& x, const Mat<T>& y) {
  Mat<T> r(x.rows * y.rows, x.cols * y.cols);
  for (int i = 0; i < x.rows; ++i)
    for (int j = 0; j < x.cols; ++j)
      for (int k = 0; k < y.rows; ++k)
        for (int l = 0; l < y.cols; ++l)
          r.at(i * y.rows + k, j * y.cols + l) = x.at(i, j) * y.at(k, l);
  return r;
}

// ---------------------------------------------------------------------------
// Scalar (Cplx) linear algebra.

struct SingularMatrix : std::runtime_error {
  explicit SingularMatrix(const std::string& w) : std::runtime_error(w) {}
};

// Solve A X = B by Gaussian elimination with partial pivoting.
CMat csolve(CMat A, CMat B);
CMat cinverse(const CMat& A);
Cplx cdet(CMat A);
int crank(CMat A, const Real& tol);
// Basis of the kernel of A (columns), with tolerance `tol` for pivots.
CMat ckernel(CMat A, const Real& tol);
Real cmax_abs(const CMat& A);

// ---------------------------------------------------------------------------
// Series matrices.

template <class K>
using SMat = Mat<SeriesT<K>>;

using PMat = SMat<Cplx>;

template <class K>
SMat<K> smat_zero(int r, int c, int m, long trunc) {
  return SMat<K>(r, c, SeriesT<K>::zero(m, trunc));
}

template <class K>
SMat<K> smat_identity(int r, int m, long trunc) {
  SMat<K> mat = smat_zero<K>(r, r, m, trunc);
  for (int i = 0; i < r; ++i)
    mat.at(i, i) = SeriesT<K>::constant(m, ScalarTraits<K>::one(), trunc);
  return mat;
}

template <class K>
SMat<K> smat_from_const(const Mat<K>& A, int m, long trunc) {
  SMat<K> r = smat_zero<K>(A.rows, A.cols, m, trunc);
  for (int i = 0; i < A.rows; ++i)
    for (int j = 0; j < A.cols; ++j)
      r.at(i, j) = SeriesT<K>::constant(m, A.at(i, j), trunc);
  return r;
}

// Apply f(y) -> f(q y) entrywise.
template <class K>
SMat<K> smat_sigma(const SMat<K>& A, const K& q) {
  SMat<K> r = A;
  for (auto& s : r.a) s = s.scaled_variable(q);
  return r;
}

template <class K>
SMat<K> smat_truncated(const SMat<K>& A, long trunc) {
  SMat<K> r = A;
  for (auto& s : r.a) s = s.truncated(trunc);
  return r;
}

template <class K>
void smat_normalize(SMat<K>& A, const Context& ctx) {
  for (auto& s : A.a) s.normalize(ctx);
}

// Coefficient of y^k, entrywise.
template <class K>
Mat<K> smat_coeff(const SMat<K>& A, long k) {
  Mat<K> r(A.rows, A.cols, K(0));
  for (int i = 0; i < A.rows; ++i)
    for (int j = 0; j < A.cols; ++j) r.at(i, j) = A.at(i, j).coeff(k);
  return r;
}

template <class K>
long smat_min_ord(const SMat<K>& A, const Context& ctx) {
  long o = kOrdInfinity;
  for (const auto& s : A.a) {
    Ord so = s.ord(ctx);
    if (!so.infinite()) o = std::min(o, so.value);
  }
  return o;
}

template <class K>
long smat_min_trunc(const SMat<K>& A) {
  long t = kOrdInfinity;
  for (const auto& s : A.a) t = std::min(t, s.trunc);
  return t;
}

template <class K>
Real smat_max_abs(const SMat<K>& A) {
  Real r = 0;
  for (const auto& s : A.a)
    for (const auto& x : s.c) r = std::max(r, ScalarTraits<K>::magnitude(x));
  return r;
}

// Solve A X = B over the series field K_m by ord-pivoted Gaussian elimination.
template <class K>
SMat<K> smat_solve(SMat<K> A, SMat<K> B, const Context& ctx) {
  const int n = A.rows;
  if (A.cols != n || B.rows != n) throw std::invalid_argument("smat_solve: shape");
  std::vector<int> colperm(static_cast<std::size_t>(n));
  for (int j = 0; j < n; ++j) colperm[static_cast<std::size_t>(j)] = j;
  for (int step = 0; step < n; ++step) {
    // pivot: minimal ord, then largest leading coefficient
    int pi = -1, pj = -1;
    long best_ord = kOrdInfinity;
    Real best_mag = 0;
    for (int i = step; i < n; ++i)
      for (int j = step; j < n; ++j) {
        Ord o = A.at(i, j).ord(ctx);
        if (o.infinite()) continue;
        Real mag = ScalarTraits<K>::magnitude(A.at(i, j).coeff(o.value));
        if (o.value < best_ord || (o.value == best_ord && mag > best_mag)) {
          best_ord = o.value;
          best_mag = mag;
          pi = i;
          pj = j;
        }
      }
    if (pi < 0) throw SingularMatrix("smat_solve: singular to working truncation");
    if (pi != step) {
      for (int j = 0; j < n; ++j) std::swap(A.at(pi, j), A.at(step, j));
      for (int j = 0; j < B.cols; ++j) std::swap(B.at(pi, j), B.at(step, j));
    }
    if (pj != step) {
      for (int i = 0; i < n; ++i) std::swap(A.at(i, pj), A.at(i, step));
      std::swap(colperm[static_cast<std::size_t>(pj)], colperm[static_cast<std::size_t>(step)]);
    }
    SeriesT<K> inv = invert(A.at(step, step), ctx);
    for (int j = step; j < n; ++j) A.at(step, j) = (inv * A.at(step, j));
    for (int j = 0; j < B.cols; ++j) B.at(step, j) = (inv * B.at(step, j));
    for (int i = 0; i < n; ++i) {
      if (i == step) continue;
      SeriesT<K> f = A.at(i, step);
      if (f.apparently_zero(ctx)) continue;
      for (int j = step; j < n; ++j) A.at(i, j) = A.at(i, j) - f * A.at(step, j);
      for (int j = 0; j < B.cols; ++j) B.at(i, j) = B.at(i, j) - f * B.at(step, j);
    }
  }
  // undo column permutation: X[colperm[i]] = B[i]
  SMat<K> X = B;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < B.cols; ++j) X.at(colperm[static_cast<std::size_t>(i)], j) = B.at(i, j);
  smat_normalize(X, ctx);
  return X;
}

template <class K>
SMat<K> smat_inverse(const SMat<K>& A, const Context& ctx) {
  long t = smat_min_trunc(A);
  return smat_solve(A, smat_identity<K>(A.rows, A.a.empty() ? 1 : A.a.front().m, t), ctx);
}

// Determinant over the series field (elimination, ord pivoting).
template <class K>
SeriesT<K> smat_det(SMat<K> A, const Context& ctx) {
  const int n = A.rows;
  int mram = A.a.empty() ? 1 : A.a.front().m;
  SeriesT<K> det = SeriesT<K>::constant(mram, ScalarTraits<K>::one(), smat_min_trunc(A));
  for (int step = 0; step < n; ++step) {
    int pi = -1;
    long best_ord = kOrdInfinity;
    Real best_mag = 0;
    for (int i = step; i < n; ++i) {
      Ord o = A.at(i, step).ord(ctx);
      if (o.infinite()) continue;
      Real mag = ScalarTraits<K>::magnitude(A.at(i, step).coeff(o.value));
      if (o.value < best_ord || (o.value == best_ord && mag > best_mag)) {
        best_ord = o.value;
        best_mag = mag;
        pi = i;
      }
    }
    if (pi < 0) return SeriesT<K>::zero(mram, smat_min_trunc(A));
    if (pi != step) {
      for (int j = 0; j < n; ++j) std::swap(A.at(pi, j), A.at(step, j));
      det = -det;
    }
    det = det * A.at(step, step);
    SeriesT<K> inv = invert(A.at(step, step), ctx);
    for (int i = step + 1; i < n; ++i) {
      SeriesT<K> f = A.at(i, step) * inv;
      if (f.apparently_zero(ctx)) continue;
      for (int j = step; j < n; ++j) A.at(i, j) = A.at(i, j) - f * A.at(step, j);
    }
  }
  det.normalize(ctx);
  return det;
}

// Rank over the series field at working truncation.
template <class K>
int smat_rank(SMat<K> A, const Context& ctx) {
  const int rows = A.rows, cols = A.cols;
  int rank = 0;
  for (int col = 0; col < cols && rank < rows; ++col) {
    int pi = -1;
    long best_ord = kOrdInfinity;
    Real best_mag = 0;
    for (int i = rank; i < rows; ++i) {
      Ord o = A.at(i, col).ord(ctx);
      if (o.infinite()) continue;
      Real mag = ScalarTraits<K>::magnitude(A.at(i, col).coeff(o.value));
      if (o.value < best_ord || (o.value == best_ord && mag > best_mag)) {
        best_ord = o.value;
        best_mag = mag;
        pi = i;
      }
    }
    if (pi < 0) continue;
    if (pi != rank)
      for (int j = 0; j < cols; ++j) std::swap(A.at(pi, j), A.at(rank, j));
    SeriesT<K> inv = invert(A.at(rank, col), ctx);
    for (int i = rank + 1; i < rows; ++i) {
      SeriesT<K> f = A.at(i, col) * inv;
      if (f.apparently_zero(ctx)) continue;
      for (int j = col; j < cols; ++j) A.at(i, j) = A.at(i, j) - f * A.at(rank, j);
    }
    ++rank;
  }
  return rank;
}

}  // namespace qmt
