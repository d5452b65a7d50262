#include "msgfem/partition.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace msgfem {

namespace {

std::vector<int> strip_starts(int n_cells, int strips) {
  // remainder cells are assigned to the last strip
  std::vector<int> starts(strips + 1);
  const int base = n_cells / strips;
  for (int p = 0; p < strips; ++p) starts[p] = p * base;
  starts[strips] = n_cells;
  return starts;
}

CellRect expand(const CellRect& r, int layers, int nx, int ny) {
  return {std::max(0, r.x0 - layers), std::max(0, r.y0 - layers), std::min(nx, r.x1 + layers),
          std::min(ny, r.y1 + layers)};
}

std::vector<int> rect_elements(const Mesh& mesh, const CellRect& r) {
  std::vector<int> out;
  out.reserve(static_cast<std::size_t>(r.width()) * r.height() * 2);
  for (int cy = r.y0; cy < r.y1; ++cy)
    for (int cx = r.x0; cx < r.x1; ++cx) {
      const int cell = cy * mesh.nx + cx;
      out.push_back(2 * cell);
      out.push_back(2 * cell + 1);
    }
  return out;
}

std::vector<int> rect_nodes(const FeSpace& space, const CellRect& r,
                            const std::vector<std::uint8_t>& dirichlet) {
  // lattice rectangle of the cell closure
  std::vector<int> out;
  const int d = space.degree;
  for (int ay = r.y0 * d; ay <= r.y1 * d; ++ay)
    for (int ax = r.x0 * d; ax <= r.x1 * d; ++ax) {
      const int q = space.node(ax, ay);
      if (!dirichlet[q]) out.push_back(q);
    }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace

DecompositionPlan build_plan(std::shared_ptr<const FeSpace> space, const PartitionParams& params,
                             const std::vector<std::uint8_t>* global_dirichlet) {
  const FeSpace& sp = *space;
  if (params.m_x < 1 || params.m_y < 1) throw InvalidDimensions("build_plan: m_x, m_y >= 1");
  if (params.m_x > sp.mesh.nx || params.m_y > sp.mesh.ny)
    throw InvalidDimensions("build_plan: more subdomains than cells");
  if (params.overlap_layers < 1 && params.m_x * params.m_y > 1)
    throw InvalidDimensions("build_plan: overlap must be >= 1 layer");
  if (params.oversample_layers < 0) throw InvalidDimensions("build_plan: oversampling >= 0");

  DecompositionPlan plan;
  plan.space = space;
  plan.params = params;
  plan.dirichlet = global_dirichlet ? *global_dirichlet
                                    : std::vector<std::uint8_t>(sp.dim, 0);

  const auto sx = strip_starts(sp.mesh.nx, params.m_x);
  const auto sy = strip_starts(sp.mesh.ny, params.m_y);

  plan.sub.resize(static_cast<std::size_t>(params.m_x) * params.m_y);
  bool all_cover = params.m_x * params.m_y > 1;
  for (int py = 0; py < params.m_y; ++py)
    for (int px = 0; px < params.m_x; ++px) {
      Subdomain& s = plan.sub[static_cast<std::size_t>(py) * params.m_x + px];
      s.core = {sx[px], sy[py], sx[px + 1], sy[py + 1]};
      s.omega = expand(s.core, params.overlap_layers, sp.mesh.nx, sp.mesh.ny);
      s.omega_star = expand(s.omega, params.oversample_layers, sp.mesh.nx, sp.mesh.ny);
      s.omega_tilde = expand(s.omega_star, 1, sp.mesh.nx, sp.mesh.ny);
      if (!s.omega.covers(sp.mesh.nx, sp.mesh.ny)) all_cover = false;
      s.elements_core = rect_elements(sp.mesh, s.core);
      s.elements_omega = rect_elements(sp.mesh, s.omega);
      s.elements_star = rect_elements(sp.mesh, s.omega_star);
      s.elements_tilde = rect_elements(sp.mesh, s.omega_tilde);
      s.nodes = rect_nodes(sp, s.omega_star, plan.dirichlet);
      s.chi_nodes = rect_nodes(sp, s.omega, plan.dirichlet);
      s.chi_in_star.resize(s.chi_nodes.size());
      for (std::size_t j = 0; j < s.chi_nodes.size(); ++j) {
        auto it = std::lower_bound(s.nodes.begin(), s.nodes.end(), s.chi_nodes[j]);
        s.chi_in_star[j] = static_cast<int>(it - s.nodes.begin());
      }
    }
  if (all_cover) throw OverlapExceedsDomain("overlap layers make every omega_i = Omega");

  build_pu_weights(plan);

  // coloring constants by direct node-membership count
  std::vector<int> count(sp.dim, 0), count_tilde(sp.dim, 0);
  for (const Subdomain& s : plan.sub) {
    for (int q : s.chi_nodes) count[q]++;
    const int d = sp.degree;
    for (int ay = s.omega_tilde.y0 * d; ay <= s.omega_tilde.y1 * d; ++ay)
      for (int ax = s.omega_tilde.x0 * d; ax <= s.omega_tilde.x1 * d; ++ax)
        count_tilde[sp.node(ax, ay)]++;
  }
  plan.xi = *std::max_element(count.begin(), count.end());
  plan.xi_tilde_star = *std::max_element(count_tilde.begin(), count_tilde.end());
  return plan;
}

void build_pu_weights(DecompositionPlan& plan) {
  const FeSpace& sp = *plan.space;
  const int d = sp.degree;
  const double delta = plan.params.overlap_layers;

  // raw weights: per-axis linear ramp across the width-2*delta overlap zone
  // centred on the core boundary; no ramp toward the domain boundary
  auto ramp = [&](double c, int core_lo, int core_hi, int n_cells) {
    double val = 1.0;
    if (core_lo > 0) {
      double t = (c - (core_lo - delta)) / (2 * delta);
      val = std::min(val, std::clamp(t, 0.0, 1.0));
    }
    if (core_hi < n_cells) {
      double t = ((core_hi + delta) - c) / (2 * delta);
      val = std::min(val, std::clamp(t, 0.0, 1.0));
    }
    return val;
  };

  RVec total = RVec::Zero(sp.dim);
  for (Subdomain& s : plan.sub) {
    s.chi.resize(s.chi_nodes.size());
    for (std::size_t j = 0; j < s.chi_nodes.size(); ++j) {
      const auto& lat = sp.lattice_of[s.chi_nodes[j]];
      const double cx = static_cast<double>(lat[0]) / d;
      const double cy = static_cast<double>(lat[1]) / d;
      s.chi[j] = ramp(cx, s.core.x0, s.core.x1, sp.mesh.nx) *
                 ramp(cy, s.core.y0, s.core.y1, sp.mesh.ny);
      total[s.chi_nodes[j]] += s.chi[j];
    }
  }
  for (Subdomain& s : plan.sub)
    for (std::size_t j = 0; j < s.chi_nodes.size(); ++j) s.chi[j] /= total[s.chi_nodes[j]];
}

CVec DecompositionPlan::restrict_to(int i, const CVec& global) const {
  if (i < 0 || i >= size()) throw IndexOutOfRange("restrict: subdomain index");
  if (global.size() != space->dim) throw IndexOutOfRange("restrict: vector length");
  const auto& nodes = sub[i].nodes;
  CVec out(nodes.size());
  for (std::size_t j = 0; j < nodes.size(); ++j) out[j] = global[nodes[j]];
  return out;
}

CVec DecompositionPlan::extend_from(int i, const CVec& local) const {
  if (i < 0 || i >= size()) throw IndexOutOfRange("extend: subdomain index");
  const auto& nodes = sub[i].nodes;
  if (local.size() != static_cast<Eigen::Index>(nodes.size()))
    throw IndexOutOfRange("extend: vector length");
  CVec out = CVec::Zero(space->dim);
  for (std::size_t j = 0; j < nodes.size(); ++j) out[nodes[j]] = local[j];
  return out;
}

void DecompositionPlan::pu_multiply_add(int i, const CVec& local, CVec& accum) const {
  const Subdomain& s = sub[i];
  if (local.size() != static_cast<Eigen::Index>(s.nodes.size()))
    throw IndexOutOfRange("pu_multiply: vector length");
  for (std::size_t j = 0; j < s.chi_nodes.size(); ++j)
    accum[s.chi_nodes[j]] += s.chi[j] * local[s.chi_in_star[j]];
}

CVec DecompositionPlan::pu_multiply(int i, const CVec& local) const {
  if (i < 0 || i >= size()) throw IndexOutOfRange("pu_multiply: subdomain index");
  CVec out = CVec::Zero(space->dim);
  pu_multiply_add(i, local, out);
  return out;
}

std::string DecompositionPlan::summary_json() const {
  std::ostringstream os;
  os << "{\n";
  os << "  \"subdomains\": " << size() << ",\n";
  os << "  \"grid\": [" << params.m_x << ", " << params.m_y << "],\n";
  os << "  \"overlap_layers\": " << params.overlap_layers << ",\n";
  os << "  \"oversample_layers\": " << params.oversample_layers << ",\n";
  os << "  \"xi\": " << xi << ",\n";
  os << "  \"xi_tilde_star\": " << xi_tilde_star << ",\n";
  os << "  \"per_subdomain\": [\n";
  for (int i = 0; i < size(); ++i) {
    const Subdomain& s = sub[i];
    const double h_ratio =
        static_cast<double>(s.core.width()) / static_cast<double>(s.omega_star.width());
    os << "    {\"i\": " << i << ", \"core_elements\": " << s.elements_core.size()
       << ", \"omega_elements\": " << s.elements_omega.size()
       << ", \"star_elements\": " << s.elements_star.size()
       << ", \"star_nodes\": " << s.nodes.size() << ", \"H_over_Hstar\": " << h_ratio << "}"
       << (i + 1 < size() ? ",\n" : "\n");
  }
  os << "  ]\n}\n";
  return os.str();
}

}  // namespace msgfem
