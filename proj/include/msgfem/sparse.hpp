#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "msgfem/common.hpp"

namespace msgfem {

/// Row-compressed sparse matrix. Column indices are strictly increasing
/// within each row; offsets are monotone with nnz == offsets[nrows].
template <typename Scalar>
struct SparseMatrixT {
  using Vec = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

  int nrows = 0;
  int ncols = 0;
  std::vector<int> offsets;  // size nrows + 1
  std::vector<int> cols;
  std::vector<Scalar> values;

  SparseMatrixT() = default;
  SparseMatrixT(int rows, int columns) : nrows(rows), ncols(columns), offsets(rows + 1, 0) {}

  std::int64_t nnz() const { return offsets.empty() ? 0 : offsets[nrows]; }

  /// Builds from an unsorted triplet list; duplicate entries are summed.
  static SparseMatrixT from_triplets(int rows, int columns,
                                     std::vector<std::pair<std::pair<int, int>, Scalar>> triplets);

  /// Entry lookup by binary search; zero when the entry is not stored.
  Scalar coeff(int r, int c) const;

  /// Adds v to entry (r, c); the entry must exist in the pattern.
  void add(int r, int c, Scalar v) {
    const int* begin = cols.data() + offsets[r];
    const int* end = cols.data() + offsets[r + 1];
    const int* it = std::lower_bound(begin, end, c);
    values[it - cols.data()] += v;
  }

  /// y = A * x, parallel over rows.
  void multiply(const Vec& x, Vec& y) const;
  Vec operator*(const Vec& x) const {
    Vec y(nrows);
    multiply(x, y);
    return y;
  }

  CVec multiply_complex(const CVec& x) const;  // for real matrices applied to complex vectors

  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> to_dense() const;

  /// Checks the structural invariants; throws Error on violation.
  void validate() const;
};

using ComplexSparseMatrix = SparseMatrixT<Complex>;
using RealSparseMatrix = SparseMatrixT<double>;

/// Zero-valued matrix over an explicit pattern (offsets/cols are moved in).
template <typename Scalar>
SparseMatrixT<Scalar> zeros_from_pattern(int rows, int columns, std::vector<int> offsets,
                                         std::vector<int> cols) {
  SparseMatrixT<Scalar> m;
  m.nrows = rows;
  m.ncols = columns;
  m.offsets = std::move(offsets);
  m.cols = std::move(cols);
  m.values.assign(m.cols.size(), Scalar(0));
  return m;
}

/// Matrix Market complex coordinate export, header
/// "%%MatrixMarket matrix coordinate complex general".
void write_matrix_market(const std::string& path, const ComplexSparseMatrix& A);
ComplexSparseMatrix read_matrix_market(const std::string& path);

/// Opaque sparse LU decomposition (UMFPACK). Immutable after construction;
/// solves are reentrant, so a factorization is shareable across threads.
class Factorization {
 public:
  /// Factorizes a square matrix. Throws SingularMatrix when a pivot falls
  /// below 1e-14 relative to the largest pivot.
  explicit Factorization(const ComplexSparseMatrix& A);
  ~Factorization();

  Factorization(const Factorization&) = delete;
  Factorization& operator=(const Factorization&) = delete;
  Factorization(Factorization&&) noexcept;
  Factorization& operator=(Factorization&&) noexcept;

  int rows() const { return n_; }
  std::int64_t factor_nnz() const { return lunz_; }

  CVec solve(const CVec& b) const;
  void solve(const Complex* b, Complex* x) const;

 private:
  int n_ = 0;
  std::int64_t lunz_ = 0;
  void* numeric_ = nullptr;
};

ComplexSparseMatrix to_complex(const RealSparseMatrix& A);

}  // namespace msgfem
