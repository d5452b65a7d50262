#include "msgfem/report.hpp"

#include <sstream>

namespace msgfem {

namespace {
const char* status_name(SolveReport::Status s) {
  switch (s) {
    case SolveReport::Status::converged: return "converged";
    case SolveReport::Status::max_iterations: return "max_iterations";
    case SolveReport::Status::stagnated: return "stagnated";
    case SolveReport::Status::diverged: return "diverged";
  }
  return "unknown";
}
}  // namespace

std::string SolveReport::to_json() const {
  std::ostringstream os;
  os.precision(12);
  os << "{\n";
  os << "  \"status\": \"" << status_name(status) << "\",\n";
  os << "  \"iterations\": " << iterations << ",\n";
  os << "  \"exact_solution\": " << (exact_solution ? "true" : "false") << ",\n";
  os << "  \"coarse_dim\": " << coarse_dim << ",\n";
  os << "  \"n_loc_min\": " << n_loc_min << ",\n";
  os << "  \"n_loc_max\": " << n_loc_max << ",\n";
  os << "  \"lambda_oneshot\": " << lambda_oneshot << ",\n";
  os << "  \"setup_eig_seconds\": " << setup_eig_seconds << ",\n";
  os << "  \"setup_factor_seconds\": " << setup_factor_seconds << ",\n";
  os << "  \"solve_seconds\": " << solve_seconds << ",\n";
  os << "  \"residual_history\": [";
  for (std::size_t i = 0; i < residual_history.size(); ++i)
    os << (i ? ", " : "") << residual_history[i];
  os << "],\n  \"error_history\": [";
  for (std::size_t i = 0; i < error_history.size(); ++i) os << (i ? ", " : "") << error_history[i];
  os << "]\n}\n";
  return os.str();
}

}  // namespace msgfem
