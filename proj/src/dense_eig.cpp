#include "msgfem/dense_eig.hpp"

#include <Eigen/Eigenvalues>

namespace msgfem {

HermitianEigResult hermitian_generalized_eig(const CMat& A, const CMat& M, int n_ev) {
  if (A.rows() != A.cols() || M.rows() != M.cols() || A.rows() != M.rows())
    throw DimensionMismatch("hermitian_generalized_eig: A and M must be square, same size");
  const double a_scale = A.norm();
  if ((A - A.adjoint()).norm() > 1e-12 * std::max(a_scale, 1e-300))
    throw Error("hermitian_generalized_eig: A not Hermitian");

  // Spectral transform of M handles the PSD case uniformly: M = Q D Q^*,
  // T = Q_kept D_kept^{-1/2}, then solve the standard problem T^* A T.
  Eigen::SelfAdjointEigenSolver<CMat> m_eig(M);
  if (m_eig.info() != Eigen::Success) throw NotConverged("eigensolver failed on M");
  const RVec& d = m_eig.eigenvalues();
  const double d_max = d.size() > 0 ? d.maxCoeff() : 0.0;
  if (d.size() > 0 && d.minCoeff() < -1e-12 * std::max(d_max, 1e-300))
    throw Error("hermitian_generalized_eig: M not positive semi-definite");

  const double cutoff = 1e-12 * d_max;
  std::vector<int> kept;
  for (int i = 0; i < d.size(); ++i)
    if (d[i] > cutoff) kept.push_back(i);
  const int nk = static_cast<int>(kept.size());
  CMat T(A.rows(), nk);
  for (int j = 0; j < nk; ++j)
    T.col(j) = m_eig.eigenvectors().col(kept[j]) / std::sqrt(d[kept[j]]);

  Eigen::SelfAdjointEigenSolver<CMat> eig(T.adjoint() * A * T);
  if (eig.info() != Eigen::Success) throw NotConverged("eigensolver failed on reduced pencil");

  HermitianEigResult res;
  res.deflated = static_cast<int>(A.rows()) - nk;
  const int n_out = std::min(n_ev, nk);
  res.eigenvalues.resize(n_out);
  res.eigenvectors.resize(A.rows(), n_out);
  for (int j = 0; j < n_out; ++j) {
    const int src = nk - 1 - j;  // Eigen sorts ascending
    res.eigenvalues[j] = eig.eigenvalues()[src];
    res.eigenvectors.col(j) = T * eig.eigenvectors().col(src);
  }
  return res;
}

}  // namespace msgfem
