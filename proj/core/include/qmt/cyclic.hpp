#pragma once

#include "qmt/qmodule.hpp"

namespace qmt {

// Cyclic vector v with relation Phi^r v = sum_j a_j Phi^j v over K_m.
struct CyclicData {
  SeriesVec v;
  SeriesVec relation;  // a_0 .. a_{r-1}
};

struct CyclicSearchOptions {
  int coefficient_bound = 2;  // integer coefficients in [-bound, bound]
  long monomial_shifts = 1;   // also try v_i scaled by y^s, |s| <= shifts
};

// Deterministic search: standard basis vectors first, then integer-coefficient
// combinations in lexicographic order.  Returns nothing when the budget is
// exhausted (not a certificate of non-existence).
std::optional<CyclicData> find_cyclic_vector(const FormalQModule& M, const Context& ctx,
                                             const CyclicSearchOptions& opts = {});

struct TopSlope {
  long ell = 0;  // max{-ord(a_j) / (r-j)} = ell/s in lowest terms
  long s = 1;
};

// Newton-polygon top slope of the cyclic relation (orders in y_m units).
TopSlope top_slope(const CyclicData& c, const Context& ctx);

}  // namespace qmt
