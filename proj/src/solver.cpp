#include "msgfem/solver.hpp"

#include <chrono>
#include <cmath>

namespace msgfem {

namespace {
using Clock = std::chrono::steady_clock;
double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}
}  // namespace

Preconditioner::Preconditioner(std::shared_ptr<const AssembledSystem> system,
                               std::shared_ptr<const DecompositionPlan> plan,
                               PreconditionerConfig config)
    : system_(std::move(system)), plan_(std::move(plan)), config_(config) {
  if ((config_.n_loc >= 0) == (config_.rho > 0))
    throw Error("Preconditioner: exactly one of n_loc / rho must be set");
  const int N = plan_->size();
  setups_.resize(N);

  auto t0 = Clock::now();
#pragma omp parallel for schedule(dynamic)
  for (int i = 0; i < N; ++i)
    setups_[i] = setup_subdomain(*system_, *plan_, i, config_.local_bc);
  t_factor_ = seconds_since(t0);

  if (config_.mode != PrecondMode::one_level_oras) {
    t0 = Clock::now();
    bases_.resize(N);
#pragma omp parallel for schedule(dynamic)
    for (int i = 0; i < N; ++i) {
      LocalEigenBasis full = solve_local_eigenproblem(
          *system_, *plan_, i, config_.n_loc >= 0 ? config_.n_loc : 0, config_.rhs_form,
          config_.realization, &setups_[i].sys);
      bases_[i] = config_.rho > 0 ? select_by_tolerance(full, config_.rho) : std::move(full);
    }
    coarse_ = assemble_coarse(*system_, *plan_, bases_);
    t_eig_ = seconds_since(t0);
  }
}

CVec Preconditioner::apply_one_level(const CVec& r) const {
  const int N = plan_->size();
  std::vector<CVec> locals(N);
#pragma omp parallel for schedule(dynamic)
  for (int i = 0; i < N; ++i) {
    CVec rhs = plan_->restrict_to(i, r);
    if (config_.local_bc == ArtificialBc::dirichlet0)
      for (int q : setups_[i].sys.interface) rhs[q] = Complex(0);
    locals[i] = setups_[i].solver->solve(rhs);
  }
  CVec z = CVec::Zero(r.size());
  for (int i = 0; i < N; ++i) plan_->pu_multiply_add(i, locals[i], z);  // fixed order
  return z;
}

CVec Preconditioner::apply(const CVec& r) const {
  if (r.size() != system_->space->dim) throw DimensionMismatch("apply: residual size");
  switch (config_.mode) {
    case PrecondMode::one_level_oras:
      return apply_one_level(r);
    case PrecondMode::coarse_only:
      return coarse_.correct(*plan_, r);
    case PrecondMode::two_level_hybrid: {
      CVec z = apply_one_level(r);
      z += coarse_.correct(*plan_, r - system_->apply_B(z));
      return z;
    }
  }
  throw NotSetUp("apply: unknown mode");
}

CVec Preconditioner::msgfem_map(const CVec& v) const {
  if (config_.mode != PrecondMode::two_level_hybrid)
    throw NotSetUp("msgfem_map requires two_level_hybrid mode");
  const int N = plan_->size();
  const CVec Bv = system_->apply_B(v);
  std::vector<CVec> locals(N);
#pragma omp parallel for schedule(dynamic)
  for (int i = 0; i < N; ++i)
    locals[i] = local_particular_solve(*system_, *plan_, i, setups_[i],
                                       ParticularRhs::boundary_data, &v, &Bv);
  CVec u1 = CVec::Zero(v.size());
  for (int i = 0; i < N; ++i) plan_->pu_multiply_add(i, locals[i], u1);
  // coarse Galerkin correction of the remainder, through its own composition
  CVec residual_fn = system_->apply_B(v - u1);
  CVec out = u1;
  if (coarse_.n_coarse > 0) {
    CVec y = coarse_.B0_solver->solve(coarse_.restrict_coarse(*plan_, residual_fn));
    coarse_.prolong_add(*plan_, y, out);
  }
  return out;
}

void Preconditioner::fill_report(SolveReport& rep) const {
  rep.coarse_dim = coarse_.n_coarse;
  rep.setup_eig_seconds = t_eig_;
  rep.setup_factor_seconds = t_factor_;
  if (!bases_.empty()) {
    rep.n_loc_min = bases_[0].n_loc();
    rep.n_loc_max = bases_[0].n_loc();
    for (const auto& b : bases_) {
      rep.n_loc_min = std::min(rep.n_loc_min, b.n_loc());
      rep.n_loc_max = std::max(rep.n_loc_max, b.n_loc());
    }
  }
}

CVec apply_preconditioner(const Preconditioner& P, const CVec& r) { return P.apply(r); }

std::pair<CVec, SolveReport> richardson_solve(const Preconditioner& P, const CVec& x0,
                                              const RichardsonOptions& opts) {
  const AssembledSystem& sys = P.system();
  auto t0 = Clock::now();
  CVec x = x0;
  SolveReport rep;
  P.fill_report(rep);

  auto bnorm = [&](const CVec& v) {
    if (opts.b_matvec) return std::sqrt(std::max(0.0, std::real(v.dot(opts.b_matvec(v)))));
    return v.norm();
  };

  CVec r = sys.F - sys.apply_B(x);
  CVec z = P.apply(r);
  double res = bnorm(z);
  rep.residual_history.push_back(res);
  const double target = opts.relative_tolerance * res;
  if (opts.exact) rep.error_history.push_back(energy_norm(sys, *opts.exact - x, EnergyMode::Ak));

  int bad_streak = 0;
  rep.status = SolveReport::Status::max_iterations;
  for (int j = 0; j < opts.max_iterations; ++j) {
    x += z;
    ++rep.iterations;
    r = sys.F - sys.apply_B(x);
    z = P.apply(r);
    res = bnorm(z);
    rep.residual_history.push_back(res);
    double prev_metric = -1, metric = -1;
    if (opts.exact) {
      rep.error_history.push_back(energy_norm(sys, *opts.exact - x, EnergyMode::Ak));
      const auto& e = rep.error_history;
      prev_metric = e[e.size() - 2];
      metric = e.back();
    } else {
      const auto& h = rep.residual_history;
      prev_metric = h[h.size() - 2];
      metric = h.back();
    }
    if (res <= target) {
      rep.status = SolveReport::Status::converged;
      break;
    }
    bad_streak = metric > prev_metric ? bad_streak + 1 : 0;
    if (bad_streak >= 5) {
      rep.status = SolveReport::Status::diverged;
      break;
    }
  }
  rep.solve_seconds = seconds_since(t0);
  return {std::move(x), std::move(rep)};
}

std::pair<CVec, SolveReport> msgfem_one_shot(const Preconditioner& P, const CVec* exact) {
  const AssembledSystem& sys = P.system();
  auto t0 = Clock::now();
  CVec u = P.apply(sys.F);
  SolveReport rep;
  P.fill_report(rep);
  rep.iterations = 1;
  rep.status = SolveReport::Status::converged;
  if (exact != nullptr) {
    const double denom = energy_norm(sys, *exact, EnergyMode::Ak);
    rep.lambda_oneshot = energy_norm(sys, *exact - u, EnergyMode::Ak) / denom;
  }
  rep.solve_seconds = seconds_since(t0);
  return {std::move(u), std::move(rep)};
}

std::pair<CVec, SolveReport> gmres_solve(const Preconditioner& P, const GmresConfig& cfg,
                                         PrecondSide side, const CVec* x0) {
  const AssembledSystem& sys = P.system();
  auto t0 = Clock::now();
  const CVec start = x0 != nullptr ? *x0 : CVec::Zero(sys.space->dim);
  GmresResult res;
  if (side == PrecondSide::left) {
    auto op = [&](const CVec& v) { return P.apply(sys.apply_B(v)); };
    res = gmres(op, P.apply(sys.F), start, cfg);
  } else {
    auto op = [&](const CVec& y) { return sys.apply_B(P.apply(y)); };
    CVec r0 = sys.F - sys.apply_B(start);
    GmresResult inner = gmres(op, r0, CVec::Zero(sys.space->dim), cfg);
    inner.x = start + P.apply(inner.x);
    res = std::move(inner);
  }
  P.fill_report(res.report);
  res.report.solve_seconds = seconds_since(t0);
  return {std::move(res.x), std::move(res.report)};
}

}  // namespace msgfem
