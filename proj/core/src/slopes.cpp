#include "qmt/slopes.hpp"

#include <map>

#include "qmt/lattice.hpp"

namespace qmt {

namespace {

// Matrix of Phi^k in the current frame: A sigma(A) ... sigma^{k-1}(A).
PMat phi_power_matrix(const FormalQModule& M, long k, const Context& ctx) {
  PMat B = smat_identity<Cplx>(M.rank(), M.m, M.trunc);
  Cplx qt(1);
  for (long t = 0; t < k; ++t) {
    PMat At = M.A;
    for (auto& s : At.a) s = s.scaled_variable(qt);
    B = t == 0 ? At : B * At;
    qt *= M.q_m;
  }
  smat_normalize(B, ctx);
  return B;
}

// Internal recursive decomposition; blocks are returned at the module's own
// ramification, along with a certificate gauge at (possibly) higher ramification.
struct DecompState {
  const Context& ctx;
  const QContext& qc;
  const SlopeOptions& opts;
};

SlopeBlocks decompose(const FormalQModule& M, DecompState& st);

// Merge equal slopes (direct sums) and sort by decreasing slope.
void normalize_blocks(std::vector<SlopeBlock>& blocks) {
  std::sort(blocks.begin(), blocks.end(),
            [](const SlopeBlock& a, const SlopeBlock& b) { return a.omega > b.omega; });
  std::vector<SlopeBlock> merged;
  for (auto& b : blocks) {
    if (!merged.empty() && merged.back().omega == b.omega)
      merged.back().block = direct_sum(merged.back().block, b.block);
    else
      merged.push_back(b);
  }
  blocks = std::move(merged);
}

// Express the slope pieces of `upstairs` (a decomposition of the pullback of M
// by factor n) as K_m-submodules of M by Galois-averaged projectors, and
// return their Phi-matrices over K_m.
std::vector<SlopeBlock> descend_blocks(const FormalQModule& M, int n,
                                       const FormalQModule& lifted, const PMat& gauge,
                                       const std::vector<std::pair<Rat, int>>& layout,
                                       DecompState& st) {
  const Context& ctx = st.ctx;
  const int r = M.rank();
  PMat Ginv = smat_inverse(gauge, ctx);
  // Group consecutive layout entries by slope.
  std::map<Rat, std::vector<std::pair<int, int>>> groups;  // slope -> [(offset, size)]
  int off = 0;
  for (const auto& [w, sz] : layout) {
    groups[w].push_back({off, sz});
    off += sz;
  }
  std::vector<SlopeBlock> out;
  for (auto it = groups.rbegin(); it != groups.rend(); ++it) {
    const Rat omega = it->first;
    // Projector onto the slope-omega piece: gauge * E * Ginv.
    PMat E = smat_zero<Cplx>(r, r, lifted.m, smat_min_trunc(gauge));
    for (const auto& [o, sz] : it->second)
      for (int i = 0; i < sz; ++i)
        E.at(o + i, o + i) = PuiseuxSeries::constant(lifted.m, Cplx(1), smat_min_trunc(gauge));
    PMat P = gauge * (E * Ginv);
    smat_normalize(P, ctx);
    // Columns of P are Galois invariant; select a K_m-independent subset.
    // Echelon with pivot recording, over the series field.
    PMat W = P;
    std::vector<int> pivots;
    {
      PMat T = W;
      int rank = 0;
      for (int col = 0; col < T.cols && rank < T.rows; ++col) {
        int pi = -1;
        long best_ord = kOrdInfinity;
        Real best_mag = 0;
        for (int i = rank; i < T.rows; ++i) {
          Ord o = T.at(i, col).ord(ctx);
          if (o.infinite()) continue;
          Real mag = abs(T.at(i, col).coeff(o.value));
          if (o.value < best_ord || (o.value == best_ord && mag > best_mag)) {
            best_ord = o.value;
            best_mag = mag;
            pi = i;
          }
        }
        if (pi < 0) continue;
        // guard against residual junk columns
        if (best_mag <= sqrt(ctx.eps)) continue;
        if (pi != rank)
          for (int j = 0; j < T.cols; ++j) std::swap(T.at(pi, j), T.at(rank, j));
        PuiseuxSeries inv = invert(T.at(rank, col), ctx);
        for (int i = rank + 1; i < T.rows; ++i) {
          PuiseuxSeries f = T.at(i, col) * inv;
          if (f.apparently_zero(ctx)) continue;
          for (int j = col; j < T.cols; ++j) T.at(i, j) = T.at(i, j) - f * T.at(rank, j);
        }
        pivots.push_back(col);
        ++rank;
      }
    }
    int rw = static_cast<int>(pivots.size());
    if (rw == 0) continue;
    PMat Wsel(r, rw);
    for (int j = 0; j < rw; ++j)
      for (int i = 0; i < r; ++i) Wsel.at(i, j) = P.at(i, pivots[static_cast<std::size_t>(j)]);
    // Phi(W) = A_up sigma(W); solve W C = Phi(W) using rw independent rows.
    PMat PhiW = lifted.A * smat_sigma(Wsel, lifted.q_m);
    smat_normalize(PhiW, ctx);
    // Select rw rows making Wsel square nonsingular (reuse pivot search).
    std::vector<int> rows;
    {
      PMat T = Wsel;
      std::vector<char> used(static_cast<std::size_t>(r), 0);
      for (int cstep = 0; cstep < rw; ++cstep) {
        int pi = -1;
        long best_ord = kOrdInfinity;
        Real best_mag = 0;
        for (int i = 0; i < r; ++i) {
          if (used[static_cast<std::size_t>(i)]) continue;
          Ord o = T.at(i, cstep).ord(ctx);
          if (o.infinite()) continue;
          Real mag = abs(T.at(i, cstep).coeff(o.value));
          if (o.value < best_ord || (o.value == best_ord && mag > best_mag)) {
            best_ord = o.value;
            best_mag = mag;
            pi = i;
          }
        }
        if (pi < 0) throw SingularMatrix("descend_blocks: projected frame is degenerate");
        used[static_cast<std::size_t>(pi)] = 1;
        rows.push_back(pi);
        PuiseuxSeries inv = invert(T.at(pi, cstep), ctx);
        for (int j2 = cstep + 1; j2 < rw; ++j2) {
          PuiseuxSeries f = T.at(pi, j2) * inv;
          for (int i = 0; i < r; ++i) T.at(i, j2) = T.at(i, j2) - f * T.at(i, cstep);
        }
      }
    }
    PMat Wsq(rw, rw), PhiWsq(rw, rw);
    for (int i = 0; i < rw; ++i)
      for (int j = 0; j < rw; ++j) {
        Wsq.at(i, j) = Wsel.at(rows[static_cast<std::size_t>(i)], j);
        PhiWsq.at(i, j) = PhiW.at(rows[static_cast<std::size_t>(i)], j);
      }
    PMat C = smat_solve(Wsq, PhiWsq, ctx);
    // Descend: entries of C must be Galois invariant (exponents = 0 mod n).
    FormalQModule up{lifted.m, lifted.q_m, C, smat_min_trunc(C)};
    FormalQModule down;
    try {
      down = galois_descent(up, n, st.ctx);
    } catch (const IncompatibleRoots&) {
      // numeric residue on non-invariant exponents: drop them if tiny
      FormalQModule up2 = up;
      Real scale = std::max(Real(1), smat_max_abs(C));
      for (auto& s : up2.A.a) {
        for (std::size_t ci = 0; ci < s.c.size(); ++ci) {
          long e = s.lo + static_cast<long>(ci);
          if (e % n != 0) {
            if (abs(s.c[ci]) > sqrt(ctx.eps) * scale)
              throw;
            s.c[ci] = 0;
          }
        }
        s.normalize(st.ctx);
      }
      down = galois_descent(up2, n, st.ctx);
    }
    down.q_m = M.q_m;
    out.push_back({omega, down});
  }
  return out;
}

SlopeBlocks single_block(const FormalQModule& M, Rat omega) {
  SlopeBlocks sb;
  sb.blocks.push_back({omega, M});
  sb.ram_factor = 1;
  sb.lifted = M;
  sb.gauge = smat_identity<Cplx>(M.rank(), M.m, M.trunc);
  sb.layout = {{omega, M.rank()}};
  return sb;
}

// Root-of-unity fallback: split by the generalized eigen decomposition of
// Psi = Phi^{s1}, s1 = r! * s, on the pullback to K_{r! m}.
SlopeBlocks rou_fallback(const FormalQModule& M, long s, DecompState& st);

SlopeBlocks decompose(const FormalQModule& M, DecompState& st) {
  const Context& ctx = st.ctx;
  const int r = M.rank();
  if (r == 1) {
    Ord o = M.A.at(0, 0).ord(ctx);
    if (o.infinite()) throw std::runtime_error("slope_decomposition: Phi apparently zero");
    return single_block(M, Rat(-o.value, M.m));
  }
  auto cyc = find_cyclic_vector(M, ctx, st.opts.cyclic);
  if (!cyc) {
    // root-of-unity fallback if q_m has small exact-ish order
    for (long s = 1; s <= st.opts.root_of_unity_max_order; ++s) {
      Cplx p(1);
      for (long t = 0; t < s; ++t) p *= M.q_m;
      if (ctx.approx_eq(p, Cplx(1))) return rou_fallback(M, s, st);
    }
    throw NotCyclic(
        "slope_decomposition: cyclic-vector search budget exhausted and q_m is not a "
        "root of unity of small order (not a certificate of non-existence)");
  }
  TopSlope ts = top_slope(*cyc, ctx);
  if (ts.s > 1) {
    // Ramify: decompose the pullback, then descend slope pieces.
    FormalQModule up = pullback(M, static_cast<int>(ts.s), st.qc);
    SlopeBlocks usb = decompose(up, st);
    // Certificate: lift the upstairs certificate through the pullback factor.
    SlopeBlocks sb;
    sb.ram_factor = static_cast<int>(ts.s) * usb.ram_factor;
    sb.lifted = usb.ram_factor == 1 ? up : pullback(up, usb.ram_factor, st.qc);
    sb.gauge = usb.gauge;
    sb.layout = usb.layout;
    sb.blocks = descend_blocks(M, sb.ram_factor, sb.lifted, sb.gauge, sb.layout, st);
    normalize_blocks(sb.blocks);
    return sb;
  }
  const long ell = ts.ell;
  // Lattice generated by (y^ell Phi)^j v; reduce to a well-conditioned basis
  // of the same R_m-lattice before changing frame.
  PMat P;
  {
    PMat Praw = smat_zero<Cplx>(r, r, M.m, M.trunc);
    SeriesVec w = cyc->v;
    for (int j = 0; j < r; ++j) {
      for (int i = 0; i < r; ++i) Praw.at(i, j) = w[static_cast<std::size_t>(i)];
      w = apply_phi(M, w, ctx);
      for (auto& s : w) s = s.shifted(ell);
      for (auto& s : w) s.normalize(ctx);
    }
    P = lattice_reduce(Praw, ctx);
    normalize_basis_columns(P, ctx);
  }
  // Matrix of y^ell Phi in the lattice frame.
  FormalQModule latt_mod = gauge_transform(M, P, ctx);
  PMat B = latt_mod.A;
  for (auto& s : B.a) s = s.shifted(ell);
  smat_normalize(B, ctx);
  if (smat_min_ord(B, ctx) < 0)
    throw std::runtime_error("slope_decomposition: iterate lattice is not y^ell Phi stable");
  CMat F = smat_coeff(B, 0);
  FittingSplit fs = fitting_decomposition(F, ctx);
  const int r1 = fs.invertible_part.cols;
  if (r1 == 0)
    throw std::runtime_error("slope_decomposition: leading endomorphism unexpectedly nilpotent");
  if (r1 == r) {
    // Pure isoclinic of slope ell / m.
    return single_block(M, Rat(ell, M.m));
  }
  CMat S(r, r);
  for (int j = 0; j < r1; ++j)
    for (int i = 0; i < r; ++i) S.at(i, j) = fs.invertible_part.at(i, j);
  for (int j = 0; j < r - r1; ++j)
    for (int i = 0; i < r; ++i) S.at(i, r1 + j) = fs.nilpotent_part.at(i, j);
  PMat PS = P * smat_from_const(S, M.m, smat_min_trunc(P));
  FormalQModule arranged = gauge_transform(M, PS, ctx);
  BlockSplitResult bs = block_split(arranged, ell, r1, ctx, st.opts.orbit);
  // Cap block truncations at the input's: orders beyond it carry only the
  // q-Gevrey tail of the splitting gauge.
  bs.M1.A = smat_truncated(bs.M1.A, M.trunc);
  bs.M1.trunc = std::min(bs.M1.trunc, M.trunc);
  bs.M2.A = smat_truncated(bs.M2.A, M.trunc);
  bs.M2.trunc = std::min(bs.M2.trunc, M.trunc);

  SlopeBlocks rec = decompose(bs.M2, st);
  SlopeBlocks sb;
  sb.ram_factor = rec.ram_factor;
  Rat omega(ell, M.m);
  if (rec.ram_factor == 1) {
    sb.lifted = M;
    PMat T = PS * bs.gauge;
    // embed the recursion gauge on the complement
    PMat embed = smat_identity<Cplx>(r, M.m, smat_min_trunc(rec.gauge));
    embed.set_block(r1, r1, rec.gauge);
    sb.gauge = T * embed;
  } else {
    sb.lifted = pullback(M, rec.ram_factor, st.qc);
    PMat T_up = pullback(FormalQModule{M.m, M.q_m, PS * bs.gauge, smat_min_trunc(bs.gauge)},
                         rec.ram_factor, st.qc)
                    .A;
    PMat embed = smat_identity<Cplx>(r, sb.lifted.m, smat_min_trunc(rec.gauge));
    embed.set_block(r1, r1, rec.gauge);
    sb.gauge = T_up * embed;
  }
  sb.layout.clear();
  sb.layout.push_back({omega, r1});
  for (auto& [w2, sz] : rec.layout) sb.layout.push_back({w2, sz});
  sb.blocks.push_back({omega, bs.M1});
  for (auto& b : rec.blocks) sb.blocks.push_back(b);
  if (rec.ram_factor != 1) {
    // blocks from the recursion are at ramification m (descended there);
    // the top block bs.M1 is already at m.  Nothing further to do.
  }
  normalize_blocks(sb.blocks);
  return sb;
}

SlopeBlocks rou_fallback(const FormalQModule& M, long s, DecompState& st) {
  const Context& ctx = st.ctx;
  const int r = M.rank();
  long rfact = 1;
  for (int i = 2; i <= r; ++i) rfact *= i;
  const long s1 = rfact * s;
  // Psi = Phi^{s1} is K_m-linear (sigma^{s1} = id on K_m since q_m^{s1} = 1).
  {
    Cplx p(1);
    for (long t = 0; t < s1; ++t) p *= M.q_m;
    if (!ctx.approx_eq(p, Cplx(1)))
      throw std::runtime_error("rou_fallback: q_m^{r! s} != 1 (inconsistent root choices)");
  }
  PMat B = phi_power_matrix(M, s1, ctx);
  if (smat_min_trunc(B) <= smat_min_ord(B, ctx))
    throw std::runtime_error(
        "rou_fallback: truncation too small for Phi^{r! s}; increase the working "
        "truncation of the input module");

  struct Piece {
    Rat phi_slope;
    PMat frame;  // columns in the (possibly ramified) ambient frame
  };

  // Characteristic polynomial over the series field (Faddeev-LeVerrier).
  auto char_poly = [&](const PMat& Bsub, int mram) {
    const int d = Bsub.rows;
    std::vector<PuiseuxSeries> cp(static_cast<std::size_t>(d + 1));
    PMat Mk = smat_identity<Cplx>(d, mram, smat_min_trunc(Bsub));
    cp[static_cast<std::size_t>(d)] = PuiseuxSeries::constant(mram, Cplx(1), smat_min_trunc(Bsub));
    PMat Ak = Bsub;
    for (int k = 1; k <= d; ++k) {
      if (k > 1) Ak = Bsub * Mk;
      PuiseuxSeries tr = Ak.at(0, 0);
      for (int i = 1; i < d; ++i) tr += Ak.at(i, i);
      PuiseuxSeries ck = Cplx(Real(-1) / Real(k)) * tr;
      ck.normalize(ctx);
      cp[static_cast<std::size_t>(d - k)] = ck;
      Mk = Ak;
      for (int i = 0; i < d; ++i) Mk.at(i, i) = Mk.at(i, i) + ck;
    }
    return cp;
  };

  // Minimal eigenvalue order of Bsub from the Newton polygon of char poly.
  auto min_eigen_ord = [&](const PMat& Bsub, int mram) {
    auto cp = char_poly(Bsub, mram);
    const int d = Bsub.rows;
    bool any = false;
    Rat best(0);
    for (int j = 0; j < d; ++j) {
      Ord o = cp[static_cast<std::size_t>(j)].ord(ctx);
      if (o.infinite()) continue;
      Rat cand(o.value, d - j);
      if (!any || cand < best) best = cand;
      any = true;
    }
    if (!any) throw std::runtime_error("rou_fallback: Psi is nilpotent (Phi not invertible?)");
    return best;
  };

  // Ramify just enough to make all eigen orders integral: lcm of denominators
  // encountered while peeling.  We precompute from the full char poly hull.
  long ram = 1;
  {
    auto cp = char_poly(B, M.m);
    // all hull slopes have denominators dividing some j <= r; lcm of the
    // denominators of the vertex-to-vertex slopes is bounded by lcm(1..r).
    std::vector<std::pair<long, long>> pts;  // (j, ord c_j)
    for (int j = 0; j <= r; ++j) {
      Ord o = cp[static_cast<std::size_t>(j)].ord(ctx);
      if (!o.infinite()) pts.push_back({j, o.value});
    }
    // lower convex hull slopes
    for (std::size_t i = 0; i + 1 < pts.size(); ++i)
      for (std::size_t j = i + 1; j < pts.size(); ++j) {
        Rat sl(pts[j].second - pts[i].second, pts[j].first - pts[i].first);
        ram = std::lcm(ram, sl.den);
      }
  }
  FormalQModule amb = M;
  PMat Bamb = B;
  if (ram > 1) {
    amb = pullback(M, static_cast<int>(ram), st.qc);
    Bamb = PMat(B.rows, B.cols);
    for (int i = 0; i < B.rows; ++i)
      for (int j = 0; j < B.cols; ++j) Bamb.at(i, j) = B.at(i, j).embedded(static_cast<int>(ram));
  }
  const int mA = amb.m;

  std::vector<Piece> pieces;
  std::function<void(const PMat&, const PMat&)> split = [&](const PMat& frame, const PMat& Bsub) {
    const int d = Bsub.rows;
    Rat nu = min_eigen_ord(Bsub, mA);
    if (!nu.is_integer())
      throw std::runtime_error("rou_fallback: fractional eigen order after ramification");
    // Phi-slope of the minimal-order group: -nu / (mA * s1).
    Rat slope = Rat(-nu.num, mA) * Rat(1, s1);
    // Saturate the standard lattice under y^{-nu} Bsub (which has entries in
    // R after saturation; min eigen order nu makes iterates bounded).
    auto applyT = [&](const SeriesVec& col) {
      SeriesVec out(static_cast<std::size_t>(d), PuiseuxSeries::zero(mA, smat_min_trunc(Bsub)));
      for (int i = 0; i < d; ++i) {
        PuiseuxSeries acc = Bsub.at(i, 0) * col[0];
        for (int j = 1; j < d; ++j) acc += Bsub.at(i, j) * col[static_cast<std::size_t>(j)];
        acc = acc.shifted(-nu.num);
        acc.normalize(ctx);
        out[static_cast<std::size_t>(i)] = acc;
      }
      return out;
    };
    PMat L = lattice_saturate<Cplx>(smat_identity<Cplx>(d, mA, smat_min_trunc(Bsub)), applyT,
                                    ctx, 4 * d + 4);
    PMat Linv = smat_inverse(L, ctx);
    PMat Bl = Linv * Bsub * L;  // K-linear: no sigma twist
    for (auto& sers : Bl.a) sers = sers.shifted(-nu.num);
    smat_normalize(Bl, ctx);
    CMat F = smat_coeff(Bl, 0);
    FittingSplit fsp = fitting_decomposition(F, ctx);
    int r1 = fsp.invertible_part.cols;
    if (r1 == 0) throw std::runtime_error("rou_fallback: residue nilpotent after saturation");
    if (r1 == d) {
      pieces.push_back({slope, frame * L});
      return;
    }
    CMat S(d, d);
    for (int j = 0; j < r1; ++j)
      for (int i = 0; i < d; ++i) S.at(i, j) = fsp.invertible_part.at(i, j);
    for (int j = 0; j < d - r1; ++j)
      for (int i = 0; i < d; ++i) S.at(i, r1 + j) = fsp.nilpotent_part.at(i, j);
    PMat Sm = smat_from_const(S, mA, smat_min_trunc(Bl));
    PMat Sminv = smat_inverse(Sm, ctx);
    PMat Bs = Sminv * Bl * Sm;
    // Linear splitting (q = 1): view y^{-nu} Bs as the matrix of a "module"
    // with trivial sigma and split off the invertible part.
    FormalQModule lin{mA, Cplx(1), Bs, smat_min_trunc(Bs)};
    for (auto& sers : lin.A.a) sers = sers.shifted(nu.num);
    smat_normalize(lin.A, ctx);
    BlockSplitResult bsr = block_split(lin, -nu.num, r1, ctx, st.opts.orbit);
    PMat nf = frame * L * Sm * bsr.gauge;
    PMat piece1(nf.rows, r1), piece2(nf.rows, d - r1);
    for (int i = 0; i < nf.rows; ++i) {
      for (int j = 0; j < r1; ++j) piece1.at(i, j) = nf.at(i, j);
      for (int j = 0; j < d - r1; ++j) piece2.at(i, j) = nf.at(i, r1 + j);
    }
    pieces.push_back({slope, piece1});
    PMat B2 = bsr.M2.A;
    for (auto& sers : B2.a) sers = sers.shifted(0);
    split(piece2, B2);
  };
  split(smat_identity<Cplx>(r, mA, smat_min_trunc(Bamb)), Bamb);

  PMat T(r, r);
  std::vector<std::pair<Rat, int>> layout;
  int col = 0;
  for (const auto& pc : pieces) {
    for (int j = 0; j < pc.frame.cols; ++j, ++col)
      for (int i = 0; i < r; ++i) T.at(i, col) = pc.frame.at(i, j);
    layout.push_back({pc.phi_slope, pc.frame.cols});
  }
  if (col != r) throw std::runtime_error("rou_fallback: pieces do not fill the module");
  SlopeBlocks sb;
  sb.ram_factor = static_cast<int>(ram);
  sb.lifted = amb;
  sb.gauge = T;
  sb.layout = layout;
  if (ram == 1) {
    // blocks directly from the gauged matrix
    FormalQModule g = gauge_transform(amb, T, ctx);
    int off = 0;
    for (const auto& [w, sz] : layout) {
      sb.blocks.push_back({w, FormalQModule{M.m, M.q_m, g.A.block(off, off, sz, sz), g.trunc}});
      off += sz;
    }
  } else {
    sb.blocks = descend_blocks(M, static_cast<int>(ram), amb, T, layout, st);
  }
  normalize_blocks(sb.blocks);
  return sb;
}

}  // namespace

SlopeBlocks slope_decomposition(const FormalQModule& M, const Context& ctx,
                                const QContext& qc, const SlopeOptions& opts) {
  DecompState st{ctx, qc, opts};
  return decompose(M, st);
}

Real gauge_offdiag_residual(const SlopeBlocks& sb, const Context& ctx, long max_order_y) {
  FormalQModule g = gauge_transform(sb.lifted, sb.gauge, ctx);
  long limit = max_order_y >= kOrdInfinity / 2 ? kOrdInfinity
                                               : max_order_y * static_cast<long>(sb.lifted.m);
  Real res = 0;
  int off_i = 0;
  for (std::size_t bi = 0; bi < sb.layout.size(); ++bi) {
    int sz_i = sb.layout[bi].second;
    int off_j = 0;
    for (std::size_t bj = 0; bj < sb.layout.size(); ++bj) {
      int sz_j = sb.layout[bj].second;
      if (bi != bj) {
        for (int i = 0; i < sz_i; ++i)
          for (int j = 0; j < sz_j; ++j) {
            const PuiseuxSeries& e = g.A.at(off_i + i, off_j + j);
            for (std::size_t ci = 0; ci < e.c.size(); ++ci) {
              long k = e.lo + static_cast<long>(ci);
              if (k >= limit) break;
              res = std::max(res, abs(e.c[ci]));
            }
          }
      }
      off_j += sz_j;
    }
    off_i += sz_i;
  }
  return res;
}

}  // namespace qmt
