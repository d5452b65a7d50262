#pragma once

#include "msgfem/coarse.hpp"
#include "msgfem/gmres.hpp"
#include "msgfem/report.hpp"

namespace msgfem {

enum class PrecondMode { two_level_hybrid, one_level_oras, coarse_only };
enum class PrecondSide { left, right };

struct PreconditionerConfig {
  PrecondMode mode = PrecondMode::two_level_hybrid;
  ArtificialBc local_bc = ArtificialBc::impedance_ikV;
  int n_loc = -1;     // fixed eigenfunction count per subdomain, or
  double rho = -1.0;  // eigenvalue tolerance: keep lambda > rho^2
  EigRhsForm rhs_form = EigRhsForm::A_seminorm;
  EigRealization realization = EigRealization::harmonic_basis;
};

/// Two-level hybrid RAS preconditioner
///   M^{-1} = sum_i chi_i B_i^{-1} E_i^T
///          + (E_0 B_0^{-1} E_0^T)(I - B sum_i chi_i B_i^{-1} E_i^T),
/// with impedance (ORAS) or Dirichlet local solves. Setup factorizes every
/// local matrix and solves the local eigenproblems; apply is linear and
/// side-effect free.
class Preconditioner {
 public:
  Preconditioner(std::shared_ptr<const AssembledSystem> system,
                 std::shared_ptr<const DecompositionPlan> plan, PreconditionerConfig config);

  const AssembledSystem& system() const { return *system_; }
  const DecompositionPlan& plan() const { return *plan_; }
  const PreconditionerConfig& config() const { return config_; }
  const CoarseBasis& coarse() const { return coarse_; }
  const std::vector<LocalEigenBasis>& bases() const { return bases_; }
  const SubdomainSetup& subdomain(int i) const { return setups_[i]; }
  int coarse_dim() const { return coarse_.n_coarse; }

  double setup_eig_seconds() const { return t_eig_; }
  double setup_factor_seconds() const { return t_factor_; }

  /// z = M^{-1} r.
  CVec apply(const CVec& r) const;

  /// The MS-GFEM map G(v) = sum chi_i pi_i(v) + pi_S(v - sum chi_i pi_i(v)),
  /// evaluated through the operator composition (not through apply(B v)).
  /// Requires two_level_hybrid mode.
  CVec msgfem_map(const CVec& v) const;

  /// Local pass only: sum_i chi_i B_i^{-1} E_i^T r.
  CVec apply_one_level(const CVec& r) const;

  void fill_report(SolveReport& rep) const;

 private:
  std::shared_ptr<const AssembledSystem> system_;
  std::shared_ptr<const DecompositionPlan> plan_;
  PreconditionerConfig config_;
  std::vector<SubdomainSetup> setups_;
  std::vector<LocalEigenBasis> bases_;
  CoarseBasis coarse_;
  double t_eig_ = 0.0, t_factor_ = 0.0;
};

CVec apply_preconditioner(const Preconditioner& P, const CVec& r);

struct RichardsonOptions {
  int max_iterations = 100;
  double relative_tolerance = 1e-6;
  const CVec* exact = nullptr;  // enables ||.||_{A,k} error tracking
  LinearOperator b_matvec;      // norm for the preconditioned residual history
};

/// Preconditioned Richardson iteration x <- x + M^{-1}(F - B x); the
/// iterative MS-GFEM. Reports per-step preconditioned residuals and, when the
/// exact discrete solution is supplied, the ||.||_{A,k} error history.
/// status == diverged after 5 consecutive non-contracting steps.
std::pair<CVec, SolveReport> richardson_solve(const Preconditioner& P, const CVec& x0,
                                              const RichardsonOptions& opts);

/// One-shot MS-GFEM solve (the first Richardson iterate from x0 = 0). When
/// the exact discrete solution is supplied, the report carries
/// lambda_oneshot = ||u - u_G||_{A,k} / ||u||_{A,k}.
std::pair<CVec, SolveReport> msgfem_one_shot(const Preconditioner& P, const CVec* exact = nullptr);

/// Preconditioned GMRES on B x = F; left preconditioning by default (the
/// residual matches M^{-1}F - M^{-1}B x).
std::pair<CVec, SolveReport> gmres_solve(const Preconditioner& P, const GmresConfig& cfg,
                                         PrecondSide side = PrecondSide::left,
                                         const CVec* x0 = nullptr);

}  // namespace msgfem
