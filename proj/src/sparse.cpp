#include "msgfem/sparse.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include <suitesparse/umfpack.h>

namespace msgfem {

template <typename Scalar>
SparseMatrixT<Scalar> SparseMatrixT<Scalar>::from_triplets(
    int rows, int columns, std::vector<std::pair<std::pair<int, int>, Scalar>> triplets) {
  for (const auto& [rc, v] : triplets)
    if (rc.first < 0 || rc.first >= rows || rc.second < 0 || rc.second >= columns)
      throw IndexOutOfRange("triplet index outside matrix");
  std::sort(triplets.begin(), triplets.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  SparseMatrixT<Scalar> out(rows, columns);
  out.cols.reserve(triplets.size());
  out.values.reserve(triplets.size());
  int current_row = 0;
  for (const auto& [rc, v] : triplets) {
    if (rc.first == current_row - 1 && !out.cols.empty() && out.cols.back() == rc.second) {
      out.values.back() += v;  // duplicate entry
      continue;
    }
    while (current_row <= rc.first) out.offsets[current_row++] = static_cast<int>(out.cols.size());
    out.cols.push_back(rc.second);
    out.values.push_back(v);
  }
  while (current_row <= rows) out.offsets[current_row++] = static_cast<int>(out.cols.size());
  return out;
}

template <typename Scalar>
Scalar SparseMatrixT<Scalar>::coeff(int r, int c) const {
  const int* begin = cols.data() + offsets[r];
  const int* end = cols.data() + offsets[r + 1];
  const int* it = std::lower_bound(begin, end, c);
  if (it == end || *it != c) return Scalar(0);
  return values[it - cols.data()];
}

template <typename Scalar>
void SparseMatrixT<Scalar>::multiply(const Vec& x, Vec& y) const {
  if (x.size() != ncols) throw DimensionMismatch("matvec: size mismatch");
  y.resize(nrows);
#pragma omp parallel for schedule(static)
  for (int r = 0; r < nrows; ++r) {
    Scalar acc(0);
    for (int i = offsets[r]; i < offsets[r + 1]; ++i) acc += values[i] * x[cols[i]];
    y[r] = acc;
  }
}

template <typename Scalar>
CVec SparseMatrixT<Scalar>::multiply_complex(const CVec& x) const {
  if (x.size() != ncols) throw DimensionMismatch("matvec: size mismatch");
  CVec y(nrows);
#pragma omp parallel for schedule(static)
  for (int r = 0; r < nrows; ++r) {
    Complex acc(0);
    for (int i = offsets[r]; i < offsets[r + 1]; ++i) acc += values[i] * x[cols[i]];
    y[r] = acc;
  }
  return y;
}

template <typename Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> SparseMatrixT<Scalar>::to_dense() const {
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> d =
      Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>::Zero(nrows, ncols);
  for (int r = 0; r < nrows; ++r)
    for (int i = offsets[r]; i < offsets[r + 1]; ++i) d(r, cols[i]) = values[i];
  return d;
}

template <typename Scalar>
void SparseMatrixT<Scalar>::validate() const {
  if (static_cast<int>(offsets.size()) != nrows + 1) throw Error("offsets size mismatch");
  if (offsets[0] != 0) throw Error("offsets[0] != 0");
  for (int r = 0; r < nrows; ++r) {
    if (offsets[r + 1] < offsets[r]) throw Error("offsets not monotone");
    for (int i = offsets[r]; i < offsets[r + 1]; ++i) {
      if (cols[i] < 0 || cols[i] >= ncols) throw IndexOutOfRange("column index out of range");
      if (i > offsets[r] && cols[i] <= cols[i - 1])
        throw Error("column indices not strictly increasing");
    }
  }
  if (nnz() != static_cast<std::int64_t>(cols.size()) ||
      nnz() != static_cast<std::int64_t>(values.size()))
    throw Error("nnz != offsets[nrows]");
}

template struct SparseMatrixT<double>;
template struct SparseMatrixT<Complex>;

ComplexSparseMatrix to_complex(const RealSparseMatrix& A) {
  ComplexSparseMatrix B(A.nrows, A.ncols);
  B.offsets = A.offsets;
  B.cols = A.cols;
  B.values.assign(A.values.begin(), A.values.end());
  return B;
}

void write_matrix_market(const std::string& path, const ComplexSparseMatrix& A) {
  std::ofstream out(path);
  if (!out) throw Error("cannot open " + path + " for writing");
  out << "%%MatrixMarket matrix coordinate complex general\n";
  out << A.nrows << " " << A.ncols << " " << A.nnz() << "\n";
  char buf[96];
  for (int r = 0; r < A.nrows; ++r)
    for (int i = A.offsets[r]; i < A.offsets[r + 1]; ++i) {
      std::snprintf(buf, sizeof(buf), "%d %d %.17g %.17g\n", r + 1, A.cols[i] + 1,
                    A.values[i].real(), A.values[i].imag());
      out << buf;
    }
}

ComplexSparseMatrix read_matrix_market(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path);
  std::string header;
  std::getline(in, header);
  if (header.rfind("%%MatrixMarket matrix coordinate complex general", 0) != 0)
    throw MalformedFile("unsupported Matrix Market header: " + header);
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line[0] != '%') break;
  }
  std::istringstream dims(line);
  int rows, columns;
  std::int64_t count;
  if (!(dims >> rows >> columns >> count)) throw MalformedFile("bad size line");
  std::vector<std::pair<std::pair<int, int>, Complex>> trips;
  trips.reserve(count);
  for (std::int64_t i = 0; i < count; ++i) {
    int r, c;
    double re, im;
    if (!(in >> r >> c >> re >> im)) throw MalformedFile("truncated entry list");
    trips.push_back({{r - 1, c - 1}, Complex(re, im)});
  }
  return ComplexSparseMatrix::from_triplets(rows, columns, std::move(trips));
}

// ---------------------------------------------------------------------------
// Factorization (UMFPACK zi)
//
// A CSR matrix handed to the CSC interface factorizes A^T; solves then use
// UMFPACK_Aat so that the plain (non-conjugated) system A x = b is solved.
// ---------------------------------------------------------------------------

Factorization::Factorization(const ComplexSparseMatrix& A) {
  if (A.nrows != A.ncols) throw DimensionMismatch("factorize: matrix not square");
  if (A.nnz() > std::numeric_limits<int>::max()) throw Error("factorize: nnz exceeds int32");
  n_ = A.nrows;
  std::vector<double> ax(A.nnz()), az(A.nnz());
  for (std::int64_t i = 0; i < A.nnz(); ++i) {
    ax[i] = A.values[i].real();
    az[i] = A.values[i].imag();
  }
  double ctrl[UMFPACK_CONTROL], info[UMFPACK_INFO];
  umfpack_zi_defaults(ctrl);
  ctrl[UMFPACK_ORDERING] = UMFPACK_ORDERING_AMD;
  ctrl[UMFPACK_IRSTEP] = 0;
  void* symbolic = nullptr;
  int status = umfpack_zi_symbolic(n_, n_, A.offsets.data(), A.cols.data(), ax.data(), az.data(),
                                   &symbolic, ctrl, info);
  if (status != UMFPACK_OK) throw SingularMatrix("symbolic factorization failed");
  status = umfpack_zi_numeric(A.offsets.data(), A.cols.data(), ax.data(), az.data(), symbolic,
                              &numeric_, ctrl, info);
  umfpack_zi_free_symbolic(&symbolic);
  if (status == UMFPACK_WARNING_singular_matrix ||
      (status == UMFPACK_OK && info[UMFPACK_RCOND] < 1e-14)) {
    umfpack_zi_free_numeric(&numeric_);
    numeric_ = nullptr;
    throw SingularMatrix("zero pivot encountered (rcond < 1e-14)");
  }
  if (status != UMFPACK_OK) {
    if (numeric_ != nullptr) umfpack_zi_free_numeric(&numeric_);
    numeric_ = nullptr;
    throw SingularMatrix("numeric factorization failed, status " + std::to_string(status));
  }
  lunz_ = static_cast<std::int64_t>(info[UMFPACK_LNZ] + info[UMFPACK_UNZ]);

  // Row scaling hides tiny pivots from UMFPACK's rcond, so enforce the
  // 1e-14 * ||A||_max pivot threshold with an inverse-norm probe.
  double a_max = 0.0;
  for (const Complex& v : A.values) a_max = std::max(a_max, std::abs(v));
  CVec probe(n_);
  std::uint64_t state = 0x9e3779b97f4a7c15ull;
  for (int i = 0; i < n_; ++i) {
    auto next = [&state]() {
      state ^= state << 13;
      state ^= state >> 7;
      state ^= state << 17;
      return static_cast<double>(state >> 11) / 9007199254740992.0 - 0.5;
    };
    probe[i] = Complex(next(), next());
  }
  CVec sol(n_);
  solve(probe.data(), sol.data());
  if (!(sol.norm() * (1e-14 * a_max) <= probe.norm())) {
    umfpack_zi_free_numeric(&numeric_);
    numeric_ = nullptr;
    throw SingularMatrix("pivot below 1e-14 * ||A||_max threshold");
  }
}

Factorization::~Factorization() {
  if (numeric_ != nullptr) umfpack_zi_free_numeric(&numeric_);
}

Factorization::Factorization(Factorization&& other) noexcept
    : n_(other.n_), lunz_(other.lunz_), numeric_(other.numeric_) {
  other.numeric_ = nullptr;
}

Factorization& Factorization::operator=(Factorization&& other) noexcept {
  if (this != &other) {
    if (numeric_ != nullptr) umfpack_zi_free_numeric(&numeric_);
    n_ = other.n_;
    lunz_ = other.lunz_;
    numeric_ = other.numeric_;
    other.numeric_ = nullptr;
  }
  return *this;
}

void Factorization::solve(const Complex* b, Complex* x) const {
  if (numeric_ == nullptr) throw NotSetUp("factorization moved-from");
  double ctrl[UMFPACK_CONTROL];
  umfpack_zi_defaults(ctrl);
  ctrl[UMFPACK_IRSTEP] = 0;
  // Packed complex storage: pass interleaved arrays with z == nullptr.
  int status = umfpack_zi_solve(UMFPACK_Aat, nullptr, nullptr, nullptr, nullptr,
                                reinterpret_cast<double*>(x), nullptr,
                                reinterpret_cast<const double*>(b), nullptr, numeric_, ctrl,
                                nullptr);
  if (status != UMFPACK_OK) throw SingularMatrix("solve failed, status " + std::to_string(status));
}

CVec Factorization::solve(const CVec& b) const {
  if (b.size() != n_) throw DimensionMismatch("solve: rhs size mismatch");
  CVec x(n_);
  solve(b.data(), x.data());
  return x;
}

}  // namespace msgfem
