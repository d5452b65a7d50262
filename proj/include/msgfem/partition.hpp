#pragma once

#include <memory>
#include <string>

#include "msgfem/mesh.hpp"
#include "msgfem/sparse.hpp"

namespace msgfem {

struct PartitionParams {
  int m_x = 1, m_y = 1;        // subdomain grid
  int overlap_layers = 1;      // delta / h
  int oversample_layers = 0;   // delta* / h
};

/// Cell-index rectangle [x0, x1) x [y0, y1).
struct CellRect {
  int x0 = 0, y0 = 0, x1 = 0, y1 = 0;
  int width() const { return x1 - x0; }
  int height() const { return y1 - y0; }
  bool covers(int nx, int ny) const { return x0 == 0 && y0 == 0 && x1 == nx && y1 == ny; }
};

struct Subdomain {
  CellRect core;        // non-overlapping omega_ring
  CellRect omega;       // + overlap layers
  CellRect omega_star;  // + oversampling layers
  CellRect omega_tilde; // + one enlarging layer

  std::vector<int> elements_core, elements_omega, elements_star, elements_tilde;

  std::vector<int> nodes;        // U_h(omega*): global ids, sorted, Dirichlet excluded
  std::vector<int> chi_nodes;    // closure(omega) nodes, sorted, Dirichlet excluded
  std::vector<double> chi;       // PU weight per chi node
  std::vector<int> chi_in_star;  // position of each chi node inside `nodes`
};

/// Overlapping decomposition with oversampling, partition-of-unity weights
/// and the index maps E_i. Immutable after construction.
struct DecompositionPlan {
  std::shared_ptr<const FeSpace> space;
  PartitionParams params;
  std::vector<Subdomain> sub;
  std::vector<std::uint8_t> dirichlet;  // global mask the plan was built with
  int xi = 0;               // max per-node membership count over closures of omega_i
  int xi_tilde_star = 0;    // same over the enlarged oversampling domains

  int size() const { return static_cast<int>(sub.size()); }

  /// E_i^T: local = global restricted to U_h(omega_i*).
  CVec restrict_to(int i, const CVec& global) const;
  /// E_i: node-wise zero extension.
  CVec extend_from(int i, const CVec& local) const;

  /// chi_{h,i}(v) = I_h(chi_i v) as a global vector.
  CVec pu_multiply(int i, const CVec& local) const;
  void pu_multiply_add(int i, const CVec& local, CVec& accum) const;

  std::string summary_json() const;
};

/// Builds the decomposition; PU weights are attached via build_pu_weights.
/// Throws OverlapExceedsDomain when the overlap makes every omega_i = Omega
/// (with more than one subdomain).
DecompositionPlan build_plan(std::shared_ptr<const FeSpace> space, const PartitionParams& params,
                             const std::vector<std::uint8_t>* global_dirichlet = nullptr);

/// Geometric PU: linear ramp across each overlap zone (bilinear on corner
/// patches), 1 on the exclusive zone, 0 on d(omega_i), renormalized so that
/// the weights sum to exactly 1 at every node.
void build_pu_weights(DecompositionPlan& plan);

}  // namespace msgfem
