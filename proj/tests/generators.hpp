#pragma once

#include <random>

#include "qmt/qmodule.hpp"

namespace qmt::testgen {

// Random unimodular polynomial gauge: I + strictly triangular poly parts and
// unit diagonal twists, composed both ways.
inline PMat random_polynomial_gauge(std::mt19937& rng, int r, int m, long trunc) {
  std::uniform_real_distribution<double> d(-0.4, 0.4);
  std::uniform_int_distribution<int> degd(0, 2);
  PMat L = smat_identity<Cplx>(r, m, trunc);
  PMat U = smat_identity<Cplx>(r, m, trunc);
  for (int i = 0; i < r; ++i)
    for (int j = 0; j < r; ++j) {
      if (i > j) {
        int deg = degd(rng);
        for (int k = 0; k <= deg; ++k) L.at(i, j).add_to_coeff(k, Cplx(d(rng), d(rng)));
      } else if (i < j) {
        int deg = degd(rng);
        for (int k = 0; k <= deg; ++k) U.at(i, j).add_to_coeff(k, Cplx(d(rng), d(rng)));
      }
    }
  return L * U;
}

struct GeneratorSummand {
  Rat omega;
  Cplx alpha;
  int unipotent_size = 1;  // V tensor a single unipotent Jordan block
};

// Phi-matrix of L_m(omega) (x) V(alpha * J_unip) over K_1 (m = 1).
inline FormalQModule generator_sum(const std::vector<GeneratorSummand>& parts,
                                   const QContext& qc, long trunc, const Context& ctx) {
  FormalQModule acc;
  bool first = true;
  for (const auto& p : parts) {
    FormalQModule L = module_L(1, p.omega, qc, trunc);
    CMat J(p.unipotent_size, p.unipotent_size, Cplx(0));
    for (int i = 0; i < p.unipotent_size; ++i) J.at(i, i) = p.alpha;
    for (int i = 1; i < p.unipotent_size; ++i) J.at(i, i - 1) = p.alpha;
    FormalQModule V = module_V(1, J, qc, trunc);
    FormalQModule T = tensor(L, V, ctx);
    acc = first ? T : direct_sum(acc, T);
    first = false;
  }
  return acc;
}

}  // namespace qmt::testgen
