#pragma once

#include <memory>

#include "msgfem/dense_eig.hpp"
#include "msgfem/model.hpp"
#include "msgfem/partition.hpp"

namespace msgfem {

/// Eigenpairs of the local eigenproblem on the discrete Helmholtz-harmonic
/// space of omega_i*. Eigenvalues are nonincreasing; eigenvectors are local
/// coefficient vectors over U_h(omega_i*), orthonormal in the A_{omega*}
/// inner product (or A_{omega*,k} for the Ak_norm variant).
struct LocalEigenBasis {
  int subdomain = -1;
  RVec eigenvalues;
  CMat eigenvectors;  // dim(omega_i*) x n
  int deflated = 0;   // near-null A-directions removed from the harmonic pencil

  int n_loc() const { return static_cast<int>(eigenvalues.size()); }
};

enum class EigRhsForm { A_seminorm, Ak_norm };
enum class EigRealization { harmonic_basis, mixed_pencil };

/// Per-subdomain operators shared by the eigensolver, the particular solves
/// and the preconditioner: local forms over omega_i* plus the factorized
/// local solve matrix.
struct SubdomainSetup {
  LocalSystem sys;
  std::shared_ptr<const Factorization> solver;  // factorization of sys.B_loc
};

SubdomainSetup setup_subdomain(const AssembledSystem& system, const DecompositionPlan& plan,
                               int i, ArtificialBc mode);

/// PU weights of subdomain i scattered over the local dofs of omega_i*.
RVec chi_on_star(const DecompositionPlan& plan, int i);

/// Solves the local eigenproblem
///   A_{omega*,k}(I_h(chi phi), I_h(chi v)) = lambda A_{omega*}(phi, v)
/// over the discrete harmonic space, largest eigenvalues first. n_request <= 0
/// requests the full harmonic spectrum. Throws TooFewHarmonicDofs when
/// n_request exceeds the harmonic dimension.
LocalEigenBasis solve_local_eigenproblem(const AssembledSystem& system,
                                         const DecompositionPlan& plan, int i, int n_request,
                                         EigRhsForm rhs_form = EigRhsForm::A_seminorm,
                                         EigRealization realization = EigRealization::harmonic_basis,
                                         const LocalSystem* prebuilt = nullptr);

/// Keeps exactly the eigenpairs with lambda > rho^2 (strict).
LocalEigenBasis select_by_tolerance(const LocalEigenBasis& basis, double rho);
LocalEigenBasis truncate(const LocalEigenBasis& basis, int n);

enum class ParticularRhs { global_F, boundary_data };

/// Local particular solve on omega_i*, impedance or Dirichlet artificial
/// boundary. With boundary_data it evaluates the local projection
/// pi_i(w) = B_i^{-1} E_i^T B w.
CVec local_particular_solve(const AssembledSystem& system, const DecompositionPlan& plan, int i,
                            const SubdomainSetup& setup, ParticularRhs source,
                            const CVec* w_global = nullptr, const CVec* Bw_precomputed = nullptr);

/// MS-GFEM coarse space: E_0 columns chi_{h,i}(phi_{h,j}) stored as dense
/// per-subdomain blocks over the chi node sets, with B_0 = E_0^T B E_0
/// (plain transpose) factorized.
struct CoarseBasis {
  int n_coarse = 0;
  std::vector<int> col_offset;  // size N + 1
  std::vector<CMat> blocks;     // per subdomain: |chi_nodes| x n_loc(i)
  ComplexSparseMatrix B0;
  std::shared_ptr<const Factorization> B0_solver;

  int n_loc(int i) const { return col_offset[i + 1] - col_offset[i]; }

  /// E_0^T r, plain transpose (no conjugation).
  CVec restrict_coarse(const DecompositionPlan& plan, const CVec& r) const;
  /// accum += E_0 y.
  void prolong_add(const DecompositionPlan& plan, const CVec& y, CVec& accum) const;
  /// E_0 B_0^{-1} E_0^T r.
  CVec correct(const DecompositionPlan& plan, const CVec& r) const;

  /// Materialized m x n_coarse sparse E_0 (tests, export).
  ComplexSparseMatrix materialize_E0(const DecompositionPlan& plan) const;
};

/// Throws SingularCoarseMatrix when B_0 is numerically singular.
CoarseBasis assemble_coarse(const AssembledSystem& system, const DecompositionPlan& plan,
                            const std::vector<LocalEigenBasis>& bases);

}  // namespace msgfem
