#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "msgfem/mesh.hpp"

namespace msgfem::oracle {

CVec dense_solve(CMat A, CVec b) {
  const int n = static_cast<int>(A.rows());
  std::vector<int> perm(n);
  for (int i = 0; i < n; ++i) perm[i] = i;
  for (int col = 0; col < n; ++col) {
    int pivot = col;
    double best = std::abs(A(col, col));
    for (int r = col + 1; r < n; ++r)
      if (std::abs(A(r, col)) > best) {
        best = std::abs(A(r, col));
        pivot = r;
      }
    if (best == 0.0) throw SingularMatrix("oracle: zero pivot");
    if (pivot != col) {
      A.row(pivot).swap(A.row(col));
      std::swap(b[pivot], b[col]);
    }
    for (int r = col + 1; r < n; ++r) {
      const Complex f = A(r, col) / A(col, col);
      A(r, col) = Complex(0);
      for (int c = col + 1; c < n; ++c) A(r, c) -= f * A(col, c);
      b[r] -= f * b[col];
    }
  }
  CVec x(n);
  for (int r = n - 1; r >= 0; --r) {
    Complex s = b[r];
    for (int c = r + 1; c < n; ++c) s -= A(r, c) * x[c];
    x[r] = s / A(r, r);
  }
  return x;
}

namespace {

// det(A - lambda M) is real for Hermitian A, M and real lambda; evaluate it
// by plain LU without pivoting safeguards beyond row swaps.
double pencil_det(const CMat& A, const CMat& M, double lambda) {
  CMat T = A - lambda * M;
  const int n = static_cast<int>(T.rows());
  Complex det(1);
  for (int col = 0; col < n; ++col) {
    int pivot = col;
    double best = std::abs(T(col, col));
    for (int r = col + 1; r < n; ++r)
      if (std::abs(T(r, col)) > best) {
        best = std::abs(T(r, col));
        pivot = r;
      }
    if (best == 0.0) return 0.0;
    if (pivot != col) {
      T.row(pivot).swap(T.row(col));
      det = -det;
    }
    det *= T(col, col);
    for (int r = col + 1; r < n; ++r) {
      const Complex f = T(r, col) / T(col, col);
      for (int c = col; c < n; ++c) T(r, c) -= f * T(col, c);
    }
  }
  return det.real();
}

}  // namespace

std::vector<double> pencil_eigenvalues_bisection(const CMat& A, const CMat& M, double tol) {
  // All eigenvalues lie within |lambda| <= ||A|| / lambda_min(M); use a
  // generous Rayleigh-style bound scanned on a fine grid.
  const int n = static_cast<int>(A.rows());
  Eigen::SelfAdjointEigenSolver<CMat> m_eig(M);
  const double bound = 2.0 * A.norm() / m_eig.eigenvalues().minCoeff() + 1.0;
  const int grid = 20000;
  std::vector<double> roots;
  double prev_x = -bound, prev_f = pencil_det(A, M, prev_x);
  for (int i = 1; i <= grid && static_cast<int>(roots.size()) < n; ++i) {
    const double x = -bound + 2.0 * bound * i / grid;
    const double f = pencil_det(A, M, x);
    if ((prev_f < 0 && f > 0) || (prev_f > 0 && f < 0)) {
      double lo = prev_x, hi = x, flo = prev_f;
      while (hi - lo > tol) {
        const double mid = 0.5 * (lo + hi);
        const double fm = pencil_det(A, M, mid);
        if ((flo < 0 && fm < 0) || (flo > 0 && fm > 0)) {
          lo = mid;
          flo = fm;
        } else {
          hi = mid;
        }
      }
      roots.push_back(0.5 * (lo + hi));
    }
    prev_x = x;
    prev_f = f;
  }
  std::sort(roots.begin(), roots.end(), std::greater<>());
  return roots;
}

std::vector<int> grow_by_vertex_adjacency(const FeSpace* space, std::vector<int> elements,
                                          int layers) {
  const FeSpace& sp = *space;
  for (int layer = 0; layer < layers; ++layer) {
    std::set<int> verts;
    for (int e : elements) {
      const int* nd = sp.element_nodes(e);
      for (int i = 0; i < 3; ++i) verts.insert(nd[i]);  // vertices are the first three
    }
    std::set<int> grown(elements.begin(), elements.end());
    for (int e = 0; e < sp.mesh.n_triangles(); ++e) {
      const int* nd = sp.element_nodes(e);
      for (int i = 0; i < 3; ++i)
        if (verts.count(nd[i])) {
          grown.insert(e);
          break;
        }
    }
    elements.assign(grown.begin(), grown.end());
  }
  std::sort(elements.begin(), elements.end());
  return elements;
}

}  // namespace msgfem::oracle
