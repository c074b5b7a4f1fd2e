#include "qmt/cyclic.hpp"

namespace qmt {

namespace {

// Columns v, Phi v, ..., Phi^{r-1} v; returns the iterate matrix and Phi^r v.
std::pair<PMat, SeriesVec> phi_iterates(const FormalQModule& M, const SeriesVec& v,
                                        const Context& ctx) {
  const int r = M.rank();
  PMat W = smat_zero<Cplx>(r, r, M.m, M.trunc);
  SeriesVec cur = v;
  for (int j = 0; j < r; ++j) {
    for (int i = 0; i < r; ++i) W.at(i, j) = cur[static_cast<std::size_t>(i)];
    cur = apply_phi(M, cur, ctx);
  }
  return {W, cur};
}

std::optional<CyclicData> try_vector(const FormalQModule& M, const SeriesVec& v,
                                     const Context& ctx) {
  auto [W, phir] = phi_iterates(M, v, ctx);
  // The rank test and the relation only need the leading orders; truncate so
  // that divergent high-order tails cannot poison the determinant guard.
  long lowN = smat_min_ord(W, ctx) + 6 * M.rank() + 8;
  PMat Wl = smat_truncated(W, std::min(lowN, smat_min_trunc(W)));
  PuiseuxSeries det = smat_det(Wl, ctx);
  if (det.apparently_zero(ctx)) return std::nullopt;
  // Reject ill-conditioned candidates: the relation solve (and the lattice
  // built from the iterates) would be dominated by cancellation noise.
  {
    Real lead = abs(det.leading(ctx));
    Real colscale(1);
    for (int j = 0; j < Wl.cols; ++j) {
      Real cmax = 0;
      for (int i = 0; i < Wl.rows; ++i)
        for (const auto& cc : Wl.at(i, j).c) cmax = std::max(cmax, abs(cc));
      colscale *= std::max(cmax, Real("1e-30"));
    }
    if (lead <= Real("1e-12") * colscale) return std::nullopt;
  }
  PMat rhs = smat_zero<Cplx>(M.rank(), 1, M.m, M.trunc);
  for (int i = 0; i < M.rank(); ++i) rhs.at(i, 0) = phir[static_cast<std::size_t>(i)];
  PMat a;
  try {
    a = smat_solve(Wl, smat_truncated(rhs, std::min(lowN, smat_min_trunc(W))), ctx);
  } catch (const SingularMatrix&) {
    return std::nullopt;
  }
  CyclicData d;
  d.v = v;
  d.relation.reserve(static_cast<std::size_t>(M.rank()));
  for (int i = 0; i < M.rank(); ++i) d.relation.push_back(a.at(i, 0));
  return d;
}

}  // namespace

std::optional<CyclicData> find_cyclic_vector(const FormalQModule& M, const Context& ctx,
                                             const CyclicSearchOptions& opts) {
  const int r = M.rank();
  auto unit = [&](int i, long shift) {
    SeriesVec v(static_cast<std::size_t>(r), PuiseuxSeries::zero(M.m, M.trunc));
    v[static_cast<std::size_t>(i)] = PuiseuxSeries::monomial(M.m, shift, Cplx(1), M.trunc);
    return v;
  };
  // 1. standard basis vectors
  for (int i = 0; i < r; ++i)
    if (auto d = try_vector(M, unit(i, 0), ctx)) return d;
  // 2. integer combinations, lexicographic over coefficients in [-B, B]
  const int B = opts.coefficient_bound;
  std::vector<int> coef(static_cast<std::size_t>(r), -B);
  for (;;) {
    bool all_zero = true, canonical = true;
    int first_nonzero = -1;
    for (int i = 0; i < r; ++i) {
      if (coef[static_cast<std::size_t>(i)] != 0) {
        if (first_nonzero < 0) first_nonzero = i;
        all_zero = false;
      }
    }
    if (!all_zero && first_nonzero >= 0 && coef[static_cast<std::size_t>(first_nonzero)] < 0)
      canonical = false;  // skip sign duplicates
    if (!all_zero && canonical) {
      SeriesVec v(static_cast<std::size_t>(r), PuiseuxSeries::zero(M.m, M.trunc));
      for (int i = 0; i < r; ++i)
        if (coef[static_cast<std::size_t>(i)] != 0)
          v[static_cast<std::size_t>(i)] =
              PuiseuxSeries::constant(M.m, Cplx(coef[static_cast<std::size_t>(i)]), M.trunc);
      if (auto d = try_vector(M, v, ctx)) return d;
    }
    int pos = r - 1;
    while (pos >= 0 && coef[static_cast<std::size_t>(pos)] == B) {
      coef[static_cast<std::size_t>(pos)] = -B;
      --pos;
    }
    if (pos < 0) break;
    ++coef[static_cast<std::size_t>(pos)];
  }
  // 3. monomial-shifted basis vectors
  for (long s = 1; s <= opts.monomial_shifts; ++s)
    for (int i = 0; i < r; ++i) {
      if (auto d = try_vector(M, unit(i, s), ctx)) return d;
      if (auto d = try_vector(M, unit(i, -s), ctx)) return d;
    }
  return std::nullopt;
}

TopSlope top_slope(const CyclicData& c, const Context& ctx) {
  const int r = static_cast<int>(c.relation.size());
  bool any = false;
  Rat best(0);
  for (int j = 0; j < r; ++j) {
    Ord o = c.relation[static_cast<std::size_t>(j)].ord(ctx);
    if (o.infinite()) continue;
    Rat cand(-o.value, r - j);
    if (!any || cand > best) best = cand;
    any = true;
  }
  if (!any)
    throw std::runtime_error("top_slope: all relation coefficients are zero (Phi not invertible?)");
  return TopSlope{best.num, best.den};
}

}  // namespace qmt
