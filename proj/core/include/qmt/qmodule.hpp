#pragma once

#include <optional>
#include <vector>

#include "qmt/linalg.hpp"
#include "qmt/rational.hpp"

namespace qmt {

// Coherent choice of roots of q: fix log q once, q_m := exp(log(q)/m).
struct QContext {
  Cplx q{1};
  Cplx log_q{0};

  QContext() = default;
  explicit QContext(const Cplx& q_) : q(q_), log_q(log(q_)) {}

  Cplx root(long m) const { return m == 1 ? q : exp(log_q / Cplx(Real(m))); }
};

// Formal q_m-difference K_m-module in a frame: Phi*(e) = e A, coordinates
// transform v -> A sigma(v), gauge change A -> G^{-1} A sigma(G).
struct FormalQModule {
  int m = 1;      // module over K_m = C((y_m))
  Cplx q_m{1};    // sigma(f)(y_m) = f(q_m y_m)
  PMat A;         // rank x rank matrix of Puiseux series (ramification m)
  long trunc = 0;

  int rank() const { return A.rows; }
};

struct IncompatibleRoots : std::runtime_error {
  explicit IncompatibleRoots(const std::string& w) : std::runtime_error(w) {}
};

using SeriesVec = std::vector<PuiseuxSeries>;

// Coordinates of Phi*(v): A sigma_q(v).
SeriesVec apply_phi(const FormalQModule& M, const SeriesVec& v, const Context& ctx);

FormalQModule direct_sum(const FormalQModule& M1, const FormalQModule& M2);
FormalQModule tensor(const FormalQModule& M1, const FormalQModule& M2, const Context& ctx);
FormalQModule dual(const FormalQModule& M, const Context& ctx);

// A -> G^{-1} A sigma(G).
FormalQModule gauge_transform(const FormalQModule& M, const PMat& G, const Context& ctx);

// p*_{m,nm}: re-index exponents k -> n k, sigma root becomes q_{nm}.
FormalQModule pullback(const FormalQModule& M, int n, const QContext& qc);

// (p_{m/n, m})_*: M over K_m viewed over K_{m/n} on the basis e_i y_m^j.
FormalQModule pushforward(const FormalQModule& M, int n);

// Descent of a Gal(nm, m)-equivariant module whose matrix is invariant under
// the standard twist (all exponents divisible by n).  Throws if not invariant.
FormalQModule galois_descent(const FormalQModule& M, int n, const Context& ctx);

// Basic examples.
// L_m(omega): rank k(m omega), pure isoclinic of slope omega.
FormalQModule module_L(int m, Rat omega, const QContext& qc, long trunc);
// V_m(A0): Fuchsian with constant matrix A0.
FormalQModule module_V(int m, const CMat& A0, const QContext& qc, long trunc);
// V_m(alpha) rank one.
FormalQModule module_V1(int m, const Cplx& alpha, const QContext& qc, long trunc);

}  // namespace qmt
