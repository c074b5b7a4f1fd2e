#pragma once

#include "qmt/eigen.hpp"
#include "qmt/qmodule.hpp"

namespace qmt {

struct SpectralOverlap : std::runtime_error {
  explicit SpectralOverlap(const std::string& w) : std::runtime_error(w) {}
};

struct SingularSylvester : std::runtime_error {
  long degree;
  SingularSylvester(const std::string& w, long k) : std::runtime_error(w), degree(k) {}
};

struct OrbitOptions {
  int n_max = 64;  // orbit search bound when |q| = 1 and q is not a root of unity
};

// Is b in q^Z * a?  For |q| != 1 the exponent is bounded by log|b/a|/log|q|;
// for |q| = 1 the search is bounded by opts.n_max (documented incompleteness).
bool same_q_orbit(const Cplx& a, const Cplx& b, const Cplx& q, const Context& ctx,
                  const OrbitOptions& opts = {});

// (q^Z Sp(F1)) and Sp(F2) disjoint?
bool spectra_separated(const std::vector<Cplx>& sp1, const std::vector<Cplx>& sp2,
                       const Cplx& q, const Context& ctx, const OrbitOptions& opts = {});

struct BlockSplitResult {
  FormalQModule M1;
  FormalQModule M2;
  PMat gauge;  // G with G_{ii} = I, G_{ij}(0) = 0; G^{-1} A sigma(G) block-diagonal
};

// Splitting recursion: A in y^{-ell} M_r(R_m) with vanishing off-diagonal
// leading blocks and q^Z-separated leading spectra; solves the twisted
// Sylvester equations degree by degree.
BlockSplitResult block_split(const FormalQModule& M, long ell, int r1, const Context& ctx,
                             const OrbitOptions& opts = {});

// Hom-vanishing solver: the unique H in M(R_m) with A2(y) H(q y) = H(y) A1(y),
// solved degree by degree; with separated leading spectra it must be zero.
PMat solve_twisted_hom(const PMat& A1, const PMat& A2, long ell, const Cplx& q,
                       const Context& ctx);

struct NotFuchsian : std::runtime_error {
  explicit NotFuchsian(const std::string& w) : std::runtime_error(w) {}
};

struct FuchsianBlock {
  Cplx orbit_representative;
  FormalQModule block;
};

struct FuchsianSplitResult {
  std::vector<FuchsianBlock> blocks;
  PMat gauge;  // over the normalized lattice frame
  PMat lattice;  // columns: basis of the Phi-fixed lattice in the input frame
};

// Decomposition of a Fuchsian module by q^Z-orbits of the residue eigenvalues.
FuchsianSplitResult fuchsian_orbit_split(const FormalQModule& M, const Context& ctx,
                                         const OrbitOptions& opts = {});

}  // namespace qmt
