#pragma once

#include <string>
#include <vector>

#include "msgfem/common.hpp"

namespace msgfem {

/// Per-solve diagnostics shared by the Krylov and Richardson drivers.
struct SolveReport {
  enum class Status { converged, max_iterations, stagnated, diverged };

  Status status = Status::max_iterations;
  int iterations = 0;
  std::vector<double> residual_history;  // length iterations + 1, history[0] = initial
  std::vector<double> error_history;     // ||.||_{A,k} errors when the exact solution is known
  bool exact_solution = false;           // happy breakdown: Krylov space contained the solution

  int coarse_dim = 0;
  int n_loc_min = 0;
  int n_loc_max = 0;
  double lambda_oneshot = -1.0;  // relative one-shot error, < 0 when not measured

  double setup_eig_seconds = 0.0;
  double setup_factor_seconds = 0.0;
  double solve_seconds = 0.0;

  bool converged() const { return status == Status::converged; }

  /// JSON-like structured text serialization.
  std::string to_json() const;
};

}  // namespace msgfem
