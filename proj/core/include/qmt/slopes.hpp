#pragma once

#include "qmt/cyclic.hpp"
#include "qmt/splitting.hpp"

namespace qmt {

struct NotCyclic : std::runtime_error {
  explicit NotCyclic(const std::string& w) : std::runtime_error(w) {}
};

struct SlopeBlock {
  Rat omega;            // slope
  FormalQModule block;  // K_m-module (ramification of the input)
};

struct SlopeBlocks {
  std::vector<SlopeBlock> blocks;  // sorted by decreasing slope, equal slopes merged

  // Certificate at the ramification where the gauge lives: m1 = ram_factor * m.
  int ram_factor = 1;
  FormalQModule lifted;                   // pullback of the input to K_{m1}
  PMat gauge;                             // gauge^{-1} A sigma(gauge) block-diagonal
  std::vector<std::pair<Rat, int>> layout;  // slope and K_{m1}-rank per diagonal block

  std::vector<std::pair<Rat, int>> slope_multiset() const {
    std::vector<std::pair<Rat, int>> v;
    for (const auto& b : blocks) v.push_back({b.omega, b.block.rank()});
    return v;
  }
};

struct SlopeOptions {
  CyclicSearchOptions cyclic;
  OrbitOptions orbit;
  int root_of_unity_max_order = 64;  // detect q_m^s = 1 up to this order
};

// Canonical slope decomposition (Newton polygon / splitting recursion, with
// the root-of-unity eigen-decomposition fallback when no cyclic vector is
// found and q_m is a root of unity).
SlopeBlocks slope_decomposition(const FormalQModule& M, const Context& ctx,
                                const QContext& qc, const SlopeOptions& opts = {});

// Residual of the block-diagonalization certificate: max |coefficient| of the
// off-diagonal entries of gauge^{-1} A sigma(gauge), over exponents k (in the
// lifted y_{m1} units) with k < max_order_y * m1 and k below the available
// truncation.
Real gauge_offdiag_residual(const SlopeBlocks& sb, const Context& ctx,
                            long max_order_y = kOrdInfinity / 2);

}  // namespace qmt
