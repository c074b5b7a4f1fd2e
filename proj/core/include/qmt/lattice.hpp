#pragma once

#include <functional>

#include "qmt/linalg.hpp"

namespace qmt {

// R_m-lattices inside K_m^r, given by a basis matrix (columns in the ambient
// frame).  The reduction below is Hermite-style over the valuation ring:
// pivots are chosen by minimal order, quotients stay in R_m.

// Reduce a generating set (r x N columns) to a lattice basis (r x rank).
// Throws SingularMatrix if the generators do not span a rank-r lattice when
// require_full_rank is set.
template <class K>
SMat<K> lattice_reduce(SMat<K> G, const Context& ctx, bool require_full_rank = true) {
  const int rows = G.rows;
  const int cols = G.cols;
  std::vector<char> row_used(static_cast<std::size_t>(rows), 0);
  std::vector<int> pivot_cols;
  std::vector<char> col_fixed(static_cast<std::size_t>(cols), 0);
  for (int step = 0; step < rows; ++step) {
    int pi = -1, pj = -1;
    long best_ord = kOrdInfinity;
    Real best_mag = 0;
    for (int i = 0; i < rows; ++i) {
      if (row_used[static_cast<std::size_t>(i)]) continue;
      for (int j = 0; j < cols; ++j) {
        if (col_fixed[static_cast<std::size_t>(j)]) continue;
        Ord o = G.at(i, j).ord(ctx);
        if (o.infinite()) continue;
        Real mag = ScalarTraits<K>::magnitude(G.at(i, j).coeff(o.value));
        if (o.value < best_ord || (o.value == best_ord && mag > best_mag)) {
          best_ord = o.value;
          best_mag = mag;
          pi = i;
          pj = j;
        }
      }
    }
    if (pi < 0) break;
    row_used[static_cast<std::size_t>(pi)] = 1;
    col_fixed[static_cast<std::size_t>(pj)] = 1;
    pivot_cols.push_back(pj);
    SeriesT<K> inv_pivot = invert(G.at(pi, pj), ctx);
    for (int j = 0; j < cols; ++j) {
      if (col_fixed[static_cast<std::size_t>(j)]) continue;
      SeriesT<K> f = G.at(pi, j) * inv_pivot;  // in R_m by pivot minimality
      f.normalize(ctx);
      if (f.apparently_zero(ctx)) continue;
      for (int i = 0; i < rows; ++i) G.at(i, j) = G.at(i, j) - f * G.at(i, pj);
    }
  }
  if (require_full_rank && static_cast<int>(pivot_cols.size()) != rows)
    throw SingularMatrix("lattice_reduce: generators do not span a full lattice");
  SMat<K> B(rows, static_cast<int>(pivot_cols.size()));
  for (std::size_t j = 0; j < pivot_cols.size(); ++j)
    for (int i = 0; i < rows; ++i) B.at(i, static_cast<int>(j)) = G.at(i, pivot_cols[j]);
  smat_normalize(B, ctx);
  return B;
}

// Elementary divisor orders of a square series matrix over R_m (Smith form
// over the valuation ring): T ~ diag(unit * y^{d_i}).
template <class K>
std::vector<long> smith_orders(SMat<K> T, const Context& ctx) {
  const int n = T.rows;
  std::vector<long> d;
  std::vector<char> row_used(static_cast<std::size_t>(n), 0), col_used(static_cast<std::size_t>(n), 0);
  for (int step = 0; step < n; ++step) {
    int pi = -1, pj = -1;
    long best_ord = kOrdInfinity;
    Real best_mag = 0;
    for (int i = 0; i < n; ++i) {
      if (row_used[static_cast<std::size_t>(i)]) continue;
      for (int j = 0; j < n; ++j) {
        if (col_used[static_cast<std::size_t>(j)]) continue;
        Ord o = T.at(i, j).ord(ctx);
        if (o.infinite()) continue;
        Real mag = ScalarTraits<K>::magnitude(T.at(i, j).coeff(o.value));
        if (o.value < best_ord || (o.value == best_ord && mag > best_mag)) {
          best_ord = o.value;
          best_mag = mag;
          pi = i;
          pj = j;
        }
      }
    }
    if (pi < 0) throw SingularMatrix("smith_orders: singular transition matrix");
    row_used[static_cast<std::size_t>(pi)] = 1;
    col_used[static_cast<std::size_t>(pj)] = 1;
    d.push_back(best_ord);
    SeriesT<K> inv_pivot = invert(T.at(pi, pj), ctx);
    for (int j = 0; j < n; ++j) {
      if (col_used[static_cast<std::size_t>(j)]) continue;
      SeriesT<K> f = T.at(pi, j) * inv_pivot;
      f.normalize(ctx);
      if (f.apparently_zero(ctx)) continue;
      for (int i = 0; i < n; ++i) T.at(i, j) = T.at(i, j) - f * T.at(i, pj);
    }
    for (int i = 0; i < n; ++i) {
      if (row_used[static_cast<std::size_t>(i)]) continue;
      SeriesT<K> f = T.at(i, pj) * inv_pivot;
      f.normalize(ctx);
      if (f.apparently_zero(ctx)) continue;
      for (int j = 0; j < n; ++j) T.at(i, j) = T.at(i, j) - f * T.at(pi, j);
    }
  }
  std::sort(d.begin(), d.end());
  return d;
}

// Divide each basis column by its largest coefficient (a nonzero constant of
// K), which keeps the lattice and tames downstream recursions.
template <class K>
void normalize_basis_columns(SMat<K>& B, const Context& ctx) {
  for (int j = 0; j < B.cols; ++j) {
    Real best = 0;
    K best_c = ScalarTraits<K>::one();
    for (int i = 0; i < B.rows; ++i)
      for (const auto& cc : B.at(i, j).c) {
        Real mag = ScalarTraits<K>::magnitude(cc);
        if (mag > best) {
          best = mag;
          best_c = cc;
        }
      }
    if (best == 0) continue;
    for (int i = 0; i < B.rows; ++i) {
      for (auto& cc : B.at(i, j).c) cc /= best_c;
      B.at(i, j).normalize(ctx);
    }
  }
}

// Saturate a lattice under a (semi)linear map until stable:
// L <- L + T(L), where T maps column vectors to column vectors.
template <class K>
SMat<K> lattice_saturate(SMat<K> basis,
                         const std::function<std::vector<SeriesT<K>>(const std::vector<SeriesT<K>>&)>& T,
                         const Context& ctx, int max_iter) {
  const int r = basis.rows;
  long last_index = 0;
  bool first = true;
  for (int it = 0; it < max_iter; ++it) {
    SMat<K> gens(r, basis.cols * 2);
    gens.set_block(0, 0, basis);
    for (int j = 0; j < basis.cols; ++j) {
      auto img = T(basis.col(j));
      for (int i = 0; i < r; ++i) gens.at(i, basis.cols + j) = img[static_cast<std::size_t>(i)];
    }
    SMat<K> next = lattice_reduce(gens, ctx);
    normalize_basis_columns(next, ctx);
    SeriesT<K> det = smat_det(next, ctx);
    Ord o = det.ord(ctx);
    if (o.infinite()) throw SingularMatrix("lattice_saturate: degenerate lattice");
    if (!first && o.value == last_index) return next;
    last_index = o.value;
    first = false;
    basis = next;
  }
  throw std::runtime_error("lattice_saturate: did not stabilize within budget");
}

}  // namespace qmt
