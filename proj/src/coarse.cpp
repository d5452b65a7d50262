#include "msgfem/coarse.hpp"

#include <algorithm>
#include <cmath>

namespace msgfem {

SubdomainSetup setup_subdomain(const AssembledSystem& system, const DecompositionPlan& plan,
                               int i, ArtificialBc mode) {
  if (i < 0 || i >= plan.size()) throw IndexOutOfRange("setup_subdomain: index");
  SubdomainSetup s;
  s.sys = assemble_local_system(*system.space, system.spec, plan.sub[i].elements_star, mode,
                                &plan.dirichlet);
  if (s.sys.nodes != plan.sub[i].nodes)
    throw Error("internal: local node set disagrees with plan");
  try {
    s.solver = std::make_shared<Factorization>(s.sys.B_loc);
  } catch (const SingularMatrix& e) {
    throw SingularLocalMatrix(std::string("subdomain ") + std::to_string(i) + ": " + e.what());
  }
  return s;
}

RVec chi_on_star(const DecompositionPlan& plan, int i) {
  const Subdomain& s = plan.sub[i];
  RVec chi = RVec::Zero(s.nodes.size());
  for (std::size_t j = 0; j < s.chi_nodes.size(); ++j) chi[s.chi_in_star[j]] = s.chi[j];
  return chi;
}

namespace {

// Interior/interface splitting of a local system.
struct HarmonicSplit {
  std::vector<int> interior;         // local indices
  std::vector<int> interior_index;   // local index -> interior position or -1
  int n_gamma = 0;
};

HarmonicSplit split(const LocalSystem& sys) {
  HarmonicSplit h;
  h.interior_index.assign(sys.dim(), -1);
  for (int q = 0; q < sys.dim(); ++q) {
    if (sys.is_interface[q]) continue;
    h.interior_index[q] = static_cast<int>(h.interior.size());
    h.interior.push_back(q);
  }
  h.n_gamma = sys.dim() - static_cast<int>(h.interior.size());
  return h;
}

// Harmonic extension basis: one interior Dirichlet solve per interface dof,
// all amortized over a single factorization of the interior block of B_phys.
CMat harmonic_basis(const LocalSystem& sys, const HarmonicSplit& h) {
  const int n = sys.dim();
  const int ni = static_cast<int>(h.interior.size());
  std::vector<std::pair<std::pair<int, int>, Complex>> trips;
  trips.reserve(sys.B_phys.nnz());
  std::vector<std::vector<std::pair<int, Complex>>> gamma_cols(sys.dim());
  for (int r = 0; r < n; ++r) {
    const int ir = h.interior_index[r];
    if (ir < 0) continue;
    for (int p = sys.B_phys.offsets[r]; p < sys.B_phys.offsets[r + 1]; ++p) {
      const int c = sys.B_phys.cols[p];
      const int ic = h.interior_index[c];
      if (ic >= 0)
        trips.push_back({{ir, ic}, sys.B_phys.values[p]});
      else
        gamma_cols[c].push_back({ir, sys.B_phys.values[p]});
    }
  }
  ComplexSparseMatrix bii =
      ComplexSparseMatrix::from_triplets(ni, ni, std::move(trips));
  Factorization interior(bii);

  CMat Z = CMat::Zero(n, h.n_gamma);
  CVec rhs(ni), sol(ni);
  int col = 0;
  for (int q = 0; q < n; ++q) {
    if (!sys.is_interface[q]) continue;
    rhs.setZero();
    for (const auto& [ir, v] : gamma_cols[q]) rhs[ir] -= v;
    interior.solve(rhs.data(), sol.data());
    for (int ii = 0; ii < ni; ++ii) Z(h.interior[ii], col) = sol[ii];
    Z(q, col) = Complex(1);
    ++col;
  }
  return Z;
}

// Sparse real matrix times dense complex block.
CMat apply_sparse(const RealSparseMatrix& A, const CMat& X, double scale_m = 0.0,
                  const RealSparseMatrix* M = nullptr) {
  CMat Y(A.nrows, X.cols());
  for (int r = 0; r < A.nrows; ++r) {
    Eigen::RowVectorXcd acc = Eigen::RowVectorXcd::Zero(X.cols());
    for (int p = A.offsets[r]; p < A.offsets[r + 1]; ++p) acc += A.values[p] * X.row(A.cols[p]);
    if (M != nullptr)
      for (int p = M->offsets[r]; p < M->offsets[r + 1]; ++p)
        acc += (scale_m * M->values[p]) * X.row(M->cols[p]);
    Y.row(r) = acc;
  }
  return Y;
}

}  // namespace

LocalEigenBasis solve_local_eigenproblem(const AssembledSystem& system,
                                         const DecompositionPlan& plan, int i, int n_request,
                                         EigRhsForm rhs_form, EigRealization realization,
                                         const LocalSystem* prebuilt) {
  if (i < 0 || i >= plan.size()) throw IndexOutOfRange("solve_local_eigenproblem: index");
  LocalSystem built;
  const LocalSystem* sys = prebuilt;
  if (sys == nullptr) {
    built = assemble_local_system(*system.space, system.spec, plan.sub[i].elements_star,
                                  ArtificialBc::impedance_ikV, &plan.dirichlet);
    sys = &built;
  }
  const double k2 = system.k * system.k;
  const RVec chi = chi_on_star(plan, i);
  const HarmonicSplit h = split(*sys);
  if (h.n_gamma == 0) throw TooFewHarmonicDofs("subdomain has no interface dofs");
  if (n_request > h.n_gamma)
    throw TooFewHarmonicDofs("n_request " + std::to_string(n_request) +
                             " exceeds harmonic dimension " + std::to_string(h.n_gamma));
  const int n_out = n_request <= 0 ? h.n_gamma : n_request;

  LocalEigenBasis basis;
  basis.subdomain = i;

  if (realization == EigRealization::harmonic_basis) {
    CMat Z = harmonic_basis(*sys, h);
    CMat chiZ = chi.asDiagonal() * Z;
    CMat AkchiZ = apply_sparse(sys->S, chiZ, k2, &sys->M);
    CMat lhs = chiZ.adjoint() * AkchiZ;
    CMat rhs_mat;
    if (rhs_form == EigRhsForm::A_seminorm) {
      rhs_mat = Z.adjoint() * apply_sparse(sys->S, Z);
    } else {
      rhs_mat = Z.adjoint() * apply_sparse(sys->S, Z, k2, &sys->M);
    }
    lhs = Complex(0.5) * (lhs + lhs.adjoint().eval());  // clean roundoff asymmetry
    rhs_mat = Complex(0.5) * (rhs_mat + rhs_mat.adjoint().eval());
    HermitianEigResult eig;
    try {
      eig = hermitian_generalized_eig(lhs, rhs_mat, n_out);
    } catch (const Error& e) {
      throw EigSolveFailure(std::string("subdomain ") + std::to_string(i) + ": " + e.what());
    }
    basis.deflated = eig.deflated;
    basis.eigenvalues = eig.eigenvalues;
    basis.eigenvectors = Z * eig.eigenvectors;
  } else {
    // Mixed pencil: [A_rhsform  conj(B_phys) R_I^T; R_I B_phys  0] (phi, q)
    //             = lambda^{-1} [chi Ak chi  0; 0  0] (phi, q).
    // Nonzero eigenvalues are recovered from the n x n operator
    // P = (top block of L^{-1}) * (chi Ak chi).
    const int n = sys->dim();
    const int ni = static_cast<int>(h.interior.size());
    CMat L = CMat::Zero(n + ni, n + ni);
    // (1,1): the eigenproblem right-hand-side form
    for (int r = 0; r < n; ++r)
      for (int p = sys->S.offsets[r]; p < sys->S.offsets[r + 1]; ++p)
        L(r, sys->S.cols[p]) += sys->S.values[p];
    if (rhs_form == EigRhsForm::Ak_norm)
      for (int r = 0; r < n; ++r)
        for (int p = sys->M.offsets[r]; p < sys->M.offsets[r + 1]; ++p)
          L(r, sys->M.cols[p]) += k2 * sys->M.values[p];
    // constraint blocks
    for (int r = 0; r < n; ++r)
      for (int p = sys->B_phys.offsets[r]; p < sys->B_phys.offsets[r + 1]; ++p) {
        const int c = sys->B_phys.cols[p];
        const int ir = h.interior_index[r];
        if (ir >= 0) L(n + ir, c) += sys->B_phys.values[p];
        const int ic = h.interior_index[c];
        if (ic >= 0) L(r, n + ic) += std::conj(sys->B_phys.values[p]);
      }
    // weighted mass chi Ak chi (dense; the mixed route is used at small sizes)
    CMat W = CMat::Zero(n + ni, n);
    for (int r = 0; r < n; ++r) {
      for (int p = sys->S.offsets[r]; p < sys->S.offsets[r + 1]; ++p)
        W(r, sys->S.cols[p]) += chi[r] * sys->S.values[p] * chi[sys->S.cols[p]];
      for (int p = sys->M.offsets[r]; p < sys->M.offsets[r + 1]; ++p)
        W(r, sys->M.cols[p]) += k2 * chi[r] * sys->M.values[p] * chi[sys->M.cols[p]];
    }
    Eigen::PartialPivLU<CMat> lu(L);
    CMat X = lu.solve(W);
    CMat P = X.topRows(n);
    Eigen::ComplexEigenSolver<CMat> es(P);
    if (es.info() != Eigen::Success) throw EigSolveFailure("mixed pencil eigensolve failed");
    // keep (numerically) real nonzero eigenvalues, sorted descending
    std::vector<int> order(n);
    for (int j = 0; j < n; ++j) order[j] = j;
    std::sort(order.begin(), order.end(), [&](int a, int b) {
      return es.eigenvalues()[a].real() > es.eigenvalues()[b].real();
    });
    basis.eigenvalues.resize(n_out);
    basis.eigenvectors.resize(n, n_out);
    for (int j = 0; j < n_out; ++j) {
      basis.eigenvalues[j] = es.eigenvalues()[order[j]].real();
      CVec phi = es.eigenvectors().col(order[j]);
      // normalize in the pencil right-hand-side norm
      CVec sphi = sys->S.multiply_complex(phi);
      if (rhs_form == EigRhsForm::Ak_norm) sphi += k2 * sys->M.multiply_complex(phi);
      const double nrm = std::sqrt(std::max(std::real(phi.dot(sphi)), 1e-300));
      basis.eigenvectors.col(j) = phi / nrm;
    }
  }
  return basis;
}

LocalEigenBasis select_by_tolerance(const LocalEigenBasis& basis, double rho) {
  if (!(rho > 0)) throw Error("select_by_tolerance: rho must be positive");
  const double threshold = rho * rho;
  int keep = 0;
  while (keep < basis.n_loc() && basis.eigenvalues[keep] > threshold) ++keep;
  return truncate(basis, keep);
}

LocalEigenBasis truncate(const LocalEigenBasis& basis, int n) {
  n = std::min(n, basis.n_loc());
  LocalEigenBasis out;
  out.subdomain = basis.subdomain;
  out.deflated = basis.deflated;
  out.eigenvalues = basis.eigenvalues.head(n);
  out.eigenvectors = basis.eigenvectors.leftCols(n);
  return out;
}

CVec local_particular_solve(const AssembledSystem& system, const DecompositionPlan& plan, int i,
                            const SubdomainSetup& setup, ParticularRhs source,
                            const CVec* w_global, const CVec* Bw_precomputed) {
  CVec rhs;
  if (source == ParticularRhs::global_F) {
    rhs = plan.restrict_to(i, system.F);
  } else {
    if (Bw_precomputed != nullptr)
      rhs = plan.restrict_to(i, *Bw_precomputed);
    else if (w_global != nullptr)
      rhs = plan.restrict_to(i, system.apply_B(*w_global));
    else
      throw Error("local_particular_solve: boundary_data requires a vector");
  }
  if (setup.sys.mode == ArtificialBc::dirichlet0)
    for (int q : setup.sys.interface) rhs[q] = Complex(0);
  return setup.solver->solve(rhs);
}

// ---------------------------------------------------------------------------
// coarse space
// ---------------------------------------------------------------------------

CVec CoarseBasis::restrict_coarse(const DecompositionPlan& plan, const CVec& r) const {
  CVec out(n_coarse);
  for (int i = 0; i < plan.size(); ++i) {
    const int nl = n_loc(i);
    if (nl == 0) continue;
    const auto& nodes = plan.sub[i].chi_nodes;
    CVec sub(nodes.size());
    for (std::size_t q = 0; q < nodes.size(); ++q) sub[q] = r[nodes[q]];
    out.segment(col_offset[i], nl) = blocks[i].transpose() * sub;  // plain transpose
  }
  return out;
}

void CoarseBasis::prolong_add(const DecompositionPlan& plan, const CVec& y, CVec& accum) const {
  for (int i = 0; i < plan.size(); ++i) {
    const int nl = n_loc(i);
    if (nl == 0) continue;
    const auto& nodes = plan.sub[i].chi_nodes;
    CVec sub = blocks[i] * y.segment(col_offset[i], nl);
    for (std::size_t q = 0; q < nodes.size(); ++q) accum[nodes[q]] += sub[q];
  }
}

CVec CoarseBasis::correct(const DecompositionPlan& plan, const CVec& r) const {
  CVec out = CVec::Zero(r.size());
  if (n_coarse == 0) return out;
  CVec y = B0_solver->solve(restrict_coarse(plan, r));
  prolong_add(plan, y, out);
  return out;
}

ComplexSparseMatrix CoarseBasis::materialize_E0(const DecompositionPlan& plan) const {
  std::vector<std::pair<std::pair<int, int>, Complex>> trips;
  for (int i = 0; i < plan.size(); ++i) {
    const auto& nodes = plan.sub[i].chi_nodes;
    for (int a = 0; a < n_loc(i); ++a)
      for (std::size_t q = 0; q < nodes.size(); ++q)
        if (blocks[i](q, a) != Complex(0))
          trips.push_back({{nodes[q], col_offset[i] + a}, blocks[i](q, a)});
  }
  return ComplexSparseMatrix::from_triplets(plan.space->dim, n_coarse, std::move(trips));
}

CoarseBasis assemble_coarse(const AssembledSystem& system, const DecompositionPlan& plan,
                            const std::vector<LocalEigenBasis>& bases) {
  if (static_cast<int>(bases.size()) != plan.size())
    throw DimensionMismatch("assemble_coarse: one basis per subdomain required");
  CoarseBasis cb;
  const int N = plan.size();
  cb.col_offset.resize(N + 1, 0);
  cb.blocks.resize(N);
  for (int i = 0; i < N; ++i) {
    const Subdomain& s = plan.sub[i];
    const LocalEigenBasis& b = bases[i];
    cb.col_offset[i + 1] = cb.col_offset[i] + b.n_loc();
    cb.blocks[i].resize(s.chi_nodes.size(), b.n_loc());
    for (int a = 0; a < b.n_loc(); ++a)
      for (std::size_t q = 0; q < s.chi_nodes.size(); ++q)
        cb.blocks[i](q, a) = s.chi[q] * b.eigenvectors(s.chi_in_star[q], a);
  }
  cb.n_coarse = cb.col_offset[N];
  if (cb.n_coarse == 0) return cb;

  // B_0 = E_0^T B E_0 block by block: W_j = B E_0 e_(j,:) on the touched row
  // set, then (i, j) blocks for every overlapping neighbour i.
  const ComplexSparseMatrix& B = system.B;
  std::vector<std::vector<std::pair<int, CMat>>> per_j(N);
#pragma omp parallel for schedule(dynamic)
  for (int j = 0; j < N; ++j) {
    if (cb.n_loc(j) == 0) continue;
    const auto& nodes_j = plan.sub[j].chi_nodes;
    std::vector<int> mark(system.space->dim, -1);
    for (std::size_t q = 0; q < nodes_j.size(); ++q) mark[nodes_j[q]] = static_cast<int>(q);
    // touched rows: all rows coupled to the chi_j node set (pattern symmetric)
    std::vector<int> touched;
    {
      std::vector<std::uint8_t> seen(system.space->dim, 0);
      for (int c : nodes_j) {
        for (int p = B.offsets[c]; p < B.offsets[c + 1]; ++p) {
          if (!seen[B.cols[p]]) {
            seen[B.cols[p]] = 1;
            touched.push_back(B.cols[p]);
          }
        }
        if (!seen[c]) {
          seen[c] = 1;
          touched.push_back(c);
        }
      }
      std::sort(touched.begin(), touched.end());
    }
    std::vector<int> touch_index(system.space->dim, -1);
    for (std::size_t t = 0; t < touched.size(); ++t) touch_index[touched[t]] = static_cast<int>(t);
    CMat W = CMat::Zero(touched.size(), cb.n_loc(j));
    for (std::size_t t = 0; t < touched.size(); ++t) {
      const int r = touched[t];
      for (int p = B.offsets[r]; p < B.offsets[r + 1]; ++p) {
        const int q = mark[B.cols[p]];
        if (q >= 0) W.row(t) += B.values[p] * cb.blocks[j].row(q);
      }
    }
    for (int i = 0; i < N; ++i) {
      if (cb.n_loc(i) == 0) continue;
      const CellRect& a = plan.sub[i].omega;
      const CellRect& b = plan.sub[j].omega;
      if (a.x0 > b.x1 + 1 || b.x0 > a.x1 + 1 || a.y0 > b.y1 + 1 || b.y0 > a.y1 + 1) continue;
      const auto& nodes_i = plan.sub[i].chi_nodes;
      CMat block = CMat::Zero(cb.n_loc(i), cb.n_loc(j));
      bool nonzero = false;
      for (std::size_t q = 0; q < nodes_i.size(); ++q) {
        const int t = touch_index[nodes_i[q]];
        if (t < 0) continue;
        block += cb.blocks[i].row(q).transpose() * W.row(t);  // no conjugation
        nonzero = true;
      }
      if (nonzero) per_j[j].push_back({i, std::move(block)});
    }
  }

  std::vector<std::pair<std::pair<int, int>, Complex>> trips;
  for (int j = 0; j < N; ++j)
    for (const auto& [i, block] : per_j[j])
      for (int a = 0; a < block.rows(); ++a)
        for (int b = 0; b < block.cols(); ++b)
          trips.push_back({{cb.col_offset[i] + a, cb.col_offset[j] + b}, block(a, b)});
  cb.B0 = ComplexSparseMatrix::from_triplets(cb.n_coarse, cb.n_coarse, std::move(trips));
  try {
    cb.B0_solver = std::make_shared<Factorization>(cb.B0);
  } catch (const SingularMatrix& e) {
    throw SingularCoarseMatrix(std::string("B_0 factorization failed: ") + e.what());
  }
  return cb;
}

}  // namespace msgfem
