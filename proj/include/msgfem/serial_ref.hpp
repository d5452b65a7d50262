#pragma once

#include "msgfem/model.hpp"
#include "msgfem/solver.hpp"

namespace msgfem {

/// Straight-line serial reference implementations of the parallel kernels.
/// These run the plain element / row / subdomain loops in natural order and
/// exist for correctness testing and as the baseline of the benchmark tool.
namespace ref {

/// y = A x, single pass over rows.
CVec spmv(const ComplexSparseMatrix& A, const CVec& x);

/// Global S and M_V assembled by one element loop in natural element order
/// (no colouring); boundary and Dirichlet handling identical to
/// assemble_global.
AssembledSystem assemble_global(std::shared_ptr<const FeSpace> space, const ProblemSpec& spec);

/// One-level pass of the preconditioner, sequential subdomain loop.
CVec apply_one_level(const Preconditioner& P, const CVec& r);

/// Full preconditioner application using the sequential local pass.
CVec apply_preconditioner(const Preconditioner& P, const CVec& r);

}  // namespace ref
}  // namespace msgfem
