#pragma once

#include <vector>

#include "msgfem/common.hpp"
#include "msgfem/mesh.hpp"
#include "msgfem/sparse.hpp"

namespace msgfem::oracle {

/// Dense Gaussian elimination with partial pivoting, written out longhand so
/// it shares nothing with the library solve paths.
CVec dense_solve(CMat A, CVec b);

/// Real eigenvalues of the Hermitian pencil det(A - lambda M) = 0 (M positive
/// definite) by determinant sign-change bisection. Assumes simple eigenvalues,
/// which holds almost surely for the random test pencils.
std::vector<double> pencil_eigenvalues_bisection(const CMat& A, const CMat& M, double tol);

/// Brute-force layer growth of an element set by shared-vertex adjacency.
std::vector<int> grow_by_vertex_adjacency(const FeSpace* space, std::vector<int> elements,
                                          int layers);

}  // namespace msgfem::oracle
