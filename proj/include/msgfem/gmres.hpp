#pragma once

#include <functional>
#include <optional>

#include "msgfem/common.hpp"
#include "msgfem/report.hpp"

namespace msgfem {

/// Applies a linear operator to a vector.
using LinearOperator = std::function<CVec(const CVec&)>;

struct GmresConfig {
  int max_iterations = 100;
  double relative_tolerance = 1e-6;
  std::optional<int> restart;  // unrestarted when absent

  /// Norm used for the residual minimization. Euclidean by default; setting
  /// b_matvec to a Hermitian positive-definite operator M_b switches every
  /// Arnoldi inner product to (x, y)_b = y^* M_b x.
  LinearOperator b_matvec;
};

struct GmresResult {
  CVec x;
  SolveReport report;
};

/// Right-hand-side GMRES on apply(x) = rhs starting from x0. The residual
/// history is nonincreasing in the configured norm; termination at
/// ||r_j||_b <= tol * ||r_0||_b or at max_iterations.
GmresResult gmres(const LinearOperator& apply, const CVec& rhs, const CVec& x0,
                  const GmresConfig& cfg);

}  // namespace msgfem
