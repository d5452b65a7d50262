#pragma once

#include <array>
#include <functional>
#include <vector>

#include "msgfem/common.hpp"

namespace msgfem {

struct Rect {
  double x0 = 0.0, y0 = 0.0, x1 = 1.0, y1 = 1.0;
  double width() const { return x1 - x0; }
  double height() const { return y1 - y0; }
};

enum class BoundaryTag : int { left = 0, right = 1, top = 2, bottom = 3 };
constexpr std::array<BoundaryTag, 4> kAllTags = {BoundaryTag::left, BoundaryTag::right,
                                                 BoundaryTag::top, BoundaryTag::bottom};

/// Structured triangulation of a rectangle: nx x ny Cartesian cells, each
/// split along the lower-left -> upper-right diagonal. Triangle 2*c is the
/// lower-right half of cell c, triangle 2*c + 1 the upper-left half; both
/// are positively oriented.
struct Mesh {
  Rect rect;
  int nx = 0, ny = 0;

  double hx() const { return rect.width() / nx; }
  double hy() const { return rect.height() / ny; }
  int n_cells() const { return nx * ny; }
  int n_triangles() const { return 2 * nx * ny; }
  int n_vertices() const { return (nx + 1) * (ny + 1); }

  int cell_of(int tri) const { return tri / 2; }
  int cell_x(int cell) const { return cell % nx; }
  int cell_y(int cell) const { return cell / nx; }

  /// Vertex grid coordinates of a triangle, counter-clockwise.
  std::array<std::array<int, 2>, 3> triangle_vertices(int tri) const {
    const int cx = cell_x(cell_of(tri)), cy = cell_y(cell_of(tri));
    if (tri % 2 == 0) return {{{cx, cy}, {cx + 1, cy}, {cx + 1, cy + 1}}};
    return {{{cx, cy}, {cx + 1, cy + 1}, {cx, cy + 1}}};
  }
};

/// 2 * nx * ny triangles, (nx+1)(ny+1) vertices. Throws InvalidDimensions.
Mesh build_mesh(const Rect& rect, int nx, int ny);

/// Continuous P1/P2 Lagrange space on a structured Mesh. Node numbering is
/// deterministic: vertices in lexicographic order first, then (for degree 2)
/// edge midpoints in lexicographic order of their lattice coordinates.
struct FeSpace {
  Mesh mesh;
  int degree = 1;
  int dim = 0;
  int lat_nx = 0, lat_ny = 0;  // lattice extents: degree * nx, degree * ny

  std::vector<int> node_at_lattice;               // (lat_nx+1)*(lat_ny+1) -> node id
  std::vector<std::array<int, 2>> lattice_of;     // node id -> lattice coords
  std::vector<int> connectivity;                  // n_triangles * nodes_per_element
  std::array<std::vector<int>, 4> boundary_nodes; // sorted per tag

  int nodes_per_element() const { return degree == 1 ? 3 : 6; }
  int node(int ax, int ay) const { return node_at_lattice[ay * (lat_nx + 1) + ax]; }
  const int* element_nodes(int tri) const {
    return connectivity.data() + static_cast<std::size_t>(tri) * nodes_per_element();
  }
  std::array<double, 2> node_coord(int q) const {
    const auto& l = lattice_of[q];
    return {mesh.rect.x0 + l[0] * (mesh.hx() / degree), mesh.rect.y0 + l[1] * (mesh.hy() / degree)};
  }
  bool node_on_tag(int q, BoundaryTag tag) const;
};

/// dim = (nx*degree + 1)(ny*degree + 1). Throws UnsupportedDegree.
FeSpace build_space(const Mesh& mesh, int degree);

/// Nodal Lagrange interpolation I_h: v[q] = f(x_q).
CVec interpolate_nodal(const FeSpace& space, const std::function<Complex(double, double)>& f);

/// Point evaluation of an FE function; exact for polynomials up to the space
/// degree. Throws PointOutsideDomain.
Complex evaluate(const FeSpace& space, const CVec& coeffs, double x, double y);
Eigen::Vector2cd evaluate_gradient(const FeSpace& space, const CVec& coeffs, double x, double y);

// --- quadrature ---------------------------------------------------------

struct TriangleRule {
  int n = 0;
  std::array<std::array<double, 3>, 6> bary{};  // barycentric coordinates
  std::array<double, 6> weights{};              // sum to 1; integral = area * sum w f
};

/// Degree-2 three-point rule (P1) or degree-4 six-point rule (P2).
const TriangleRule& triangle_rule(int degree);

struct EdgeRule {
  int n = 3;
  std::array<double, 3> t;  // positions in [0,1]
  std::array<double, 3> weights;
};
const EdgeRule& edge_rule();

/// Values (and reference-gradients mapped to physical coordinates) of all
/// element shape functions at a barycentric point. Gradients require the
/// physical vertex coordinates.
void shape_values(int degree, const std::array<double, 3>& bary, double* vals);
void shape_gradients(int degree, const std::array<double, 3>& bary,
                     const std::array<std::array<double, 2>, 3>& verts, double (*grads)[2]);

}  // namespace msgfem
