#pragma once

#include <vector>

#include "qmt/linalg.hpp"

namespace qmt {

// Eigenvalues of a dense complex matrix (Hessenberg reduction + shifted QR).
std::vector<Cplx> eigenvalues(CMat A, const Context& ctx);

struct EigenCluster {
  Cplx value;        // representative (mean of the cluster)
  int multiplicity;  // algebraic multiplicity
};

// Group numerically equal eigenvalues; radius defaults to 1e3 * eps * scale.
std::vector<EigenCluster> cluster_eigenvalues(const std::vector<Cplx>& eigs,
                                              const Context& ctx, Real scale);

// Generalized eigenspace basis: ker (A - lambda I)^rows, columns of the result.
CMat generalized_eigenspace(const CMat& A, const Cplx& lambda, const Context& ctx);

// Fitting decomposition: columns of `nilpotent_part` span ker A^n, columns of
// `invertible_part` span im A^n; together they form a basis.
struct FittingSplit {
  CMat invertible_part;
  CMat nilpotent_part;
};
FittingSplit fitting_decomposition(const CMat& A, const Context& ctx);

// Jordan partition of a nilpotent matrix (descending block sizes).
// Throws if N^rows is not negligible.
std::vector<int> nilpotent_jordan_partition(const CMat& N, const Context& ctx);

// Jordan partition of the unipotent part of A restricted to the generalized
// eigenspace of `lambda` (A restricted there must have single eigenvalue).
std::vector<int> jordan_partition_at(const CMat& A, const Cplx& lambda, const Context& ctx);

// Principal logarithm of a unipotent matrix (finite series).
CMat unipotent_log(const CMat& U, const Context& ctx);
CMat nilpotent_exp(const CMat& N);

struct NotNilpotent : std::runtime_error {
  explicit NotNilpotent(const std::string& w) : std::runtime_error(w) {}
};

}  // namespace qmt
