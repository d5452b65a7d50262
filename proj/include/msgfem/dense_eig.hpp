#pragma once

#include "msgfem/common.hpp"

namespace msgfem {

/// Result of a Hermitian generalized eigensolve A v = lambda M v.
/// Eigenvalues are sorted in decreasing order; eigenvectors are M-orthonormal
/// on the non-deflated subspace (stored as columns).
struct HermitianEigResult {
  RVec eigenvalues;
  CMat eigenvectors;
  int deflated = 0;  // number of near-null M-directions removed
};

/// Solves the Hermitian pencil A v = lambda M v with A Hermitian and M
/// Hermitian positive semi-definite. Near-null directions of M (sigma <=
/// 1e-12 * sigma_max) are deflated. Returns the n_ev largest eigenpairs.
HermitianEigResult hermitian_generalized_eig(const CMat& A, const CMat& M, int n_ev);

}  // namespace msgfem
