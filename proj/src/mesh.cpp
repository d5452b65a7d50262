#include "msgfem/mesh.hpp"

#include <algorithm>
#include <cmath>

namespace msgfem {

Mesh build_mesh(const Rect& rect, int nx, int ny) {
  if (nx < 1 || ny < 1) throw InvalidDimensions("build_mesh: nx, ny must be >= 1");
  if (rect.width() <= 0 || rect.height() <= 0)
    throw InvalidDimensions("build_mesh: degenerate rectangle");
  return Mesh{rect, nx, ny};
}

bool FeSpace::node_on_tag(int q, BoundaryTag tag) const {
  const auto& l = lattice_of[q];
  switch (tag) {
    case BoundaryTag::left: return l[0] == 0;
    case BoundaryTag::right: return l[0] == lat_nx;
    case BoundaryTag::bottom: return l[1] == 0;
    case BoundaryTag::top: return l[1] == lat_ny;
  }
  return false;
}

FeSpace build_space(const Mesh& mesh, int degree) {
  if (degree != 1 && degree != 2) throw UnsupportedDegree("build_space: degree must be 1 or 2");
  FeSpace s;
  s.mesh = mesh;
  s.degree = degree;
  s.lat_nx = mesh.nx * degree;
  s.lat_ny = mesh.ny * degree;
  const int lw = s.lat_nx + 1, lh = s.lat_ny + 1;
  s.dim = lw * lh;
  s.node_at_lattice.assign(static_cast<std::size_t>(lw) * lh, -1);
  s.lattice_of.resize(s.dim);

  int next = 0;
  // vertices first, lexicographic
  for (int vy = 0; vy <= mesh.ny; ++vy)
    for (int vx = 0; vx <= mesh.nx; ++vx) {
      const int ax = vx * degree, ay = vy * degree;
      s.node_at_lattice[static_cast<std::size_t>(ay) * lw + ax] = next;
      s.lattice_of[next] = {ax, ay};
      ++next;
    }
  if (degree == 2) {
    // edge midpoints, lexicographic over lattice coordinates
    for (int ay = 0; ay < lh; ++ay)
      for (int ax = 0; ax < lw; ++ax) {
        if (ax % 2 == 0 && ay % 2 == 0) continue;
        s.node_at_lattice[static_cast<std::size_t>(ay) * lw + ax] = next;
        s.lattice_of[next] = {ax, ay};
        ++next;
      }
  }

  const int npe = s.nodes_per_element();
  s.connectivity.resize(static_cast<std::size_t>(mesh.n_triangles()) * npe);
  for (int t = 0; t < mesh.n_triangles(); ++t) {
    auto verts = mesh.triangle_vertices(t);
    int* nd = s.connectivity.data() + static_cast<std::size_t>(t) * npe;
    std::array<std::array<int, 2>, 3> lat;
    for (int i = 0; i < 3; ++i) lat[i] = {verts[i][0] * degree, verts[i][1] * degree};
    for (int i = 0; i < 3; ++i) nd[i] = s.node(lat[i][0], lat[i][1]);
    if (degree == 2) {
      auto mid = [&](int a, int b) {
        return s.node((lat[a][0] + lat[b][0]) / 2, (lat[a][1] + lat[b][1]) / 2);
      };
      nd[3] = mid(1, 2);
      nd[4] = mid(0, 2);
      nd[5] = mid(0, 1);
    }
  }

  for (auto tag : kAllTags) {
    auto& list = s.boundary_nodes[static_cast<int>(tag)];
    for (int q = 0; q < s.dim; ++q)
      if (s.node_on_tag(q, tag)) list.push_back(q);
    std::sort(list.begin(), list.end());
  }
  return s;
}

CVec interpolate_nodal(const FeSpace& space, const std::function<Complex(double, double)>& f) {
  CVec v(space.dim);
  for (int q = 0; q < space.dim; ++q) {
    auto xy = space.node_coord(q);
    v[q] = f(xy[0], xy[1]);
  }
  return v;
}

namespace {

const TriangleRule kRuleP1 = {
    3,
    {{{0.5, 0.5, 0.0}, {0.5, 0.0, 0.5}, {0.0, 0.5, 0.5}}},
    {1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0},
};

// symmetric degree-4 rule, two orbits
constexpr double a1 = 0.445948490915965, w1 = 0.223381589678011;
constexpr double a2 = 0.091576213509771, w2 = 0.109951743655322;
const TriangleRule kRuleP2 = {
    6,
    {{{1 - 2 * a1, a1, a1},
      {a1, 1 - 2 * a1, a1},
      {a1, a1, 1 - 2 * a1},
      {1 - 2 * a2, a2, a2},
      {a2, 1 - 2 * a2, a2},
      {a2, a2, 1 - 2 * a2}}},
    {w1, w1, w1, w2, w2, w2},
};

}  // namespace

const TriangleRule& triangle_rule(int degree) { return degree == 1 ? kRuleP1 : kRuleP2; }

const EdgeRule& edge_rule() {
  static const double s = std::sqrt(3.0 / 5.0) / 2.0;
  static const EdgeRule rule = {3, {0.5 - s, 0.5, 0.5 + s}, {5.0 / 18.0, 8.0 / 18.0, 5.0 / 18.0}};
  return rule;
}

void shape_values(int degree, const std::array<double, 3>& b, double* vals) {
  if (degree == 1) {
    vals[0] = b[0];
    vals[1] = b[1];
    vals[2] = b[2];
    return;
  }
  for (int i = 0; i < 3; ++i) vals[i] = b[i] * (2 * b[i] - 1);
  vals[3] = 4 * b[1] * b[2];
  vals[4] = 4 * b[0] * b[2];
  vals[5] = 4 * b[0] * b[1];
}

void shape_gradients(int degree, const std::array<double, 3>& b,
                     const std::array<std::array<double, 2>, 3>& v, double (*grads)[2]) {
  const double det = (v[1][0] - v[0][0]) * (v[2][1] - v[0][1]) -
                     (v[2][0] - v[0][0]) * (v[1][1] - v[0][1]);  // 2 * area, positive
  double gl[3][2] = {{(v[1][1] - v[2][1]) / det, (v[2][0] - v[1][0]) / det},
                     {(v[2][1] - v[0][1]) / det, (v[0][0] - v[2][0]) / det},
                     {(v[0][1] - v[1][1]) / det, (v[1][0] - v[0][0]) / det}};
  if (degree == 1) {
    for (int i = 0; i < 3; ++i) {
      grads[i][0] = gl[i][0];
      grads[i][1] = gl[i][1];
    }
    return;
  }
  for (int i = 0; i < 3; ++i) {
    grads[i][0] = (4 * b[i] - 1) * gl[i][0];
    grads[i][1] = (4 * b[i] - 1) * gl[i][1];
  }
  auto edge = [&](int out, int i, int j) {
    grads[out][0] = 4 * (b[i] * gl[j][0] + b[j] * gl[i][0]);
    grads[out][1] = 4 * (b[i] * gl[j][1] + b[j] * gl[i][1]);
  };
  edge(3, 1, 2);
  edge(4, 0, 2);
  edge(5, 0, 1);
}

namespace {

struct Located {
  int tri;
  std::array<double, 3> bary;
  std::array<std::array<double, 2>, 3> verts;
};

Located locate(const FeSpace& space, double x, double y) {
  const Mesh& m = space.mesh;
  const double tol = 1e-10 * std::max(m.rect.width(), m.rect.height());
  if (x < m.rect.x0 - tol || x > m.rect.x1 + tol || y < m.rect.y0 - tol || y > m.rect.y1 + tol)
    throw PointOutsideDomain("evaluate: point outside mesh rectangle");
  double fx = (x - m.rect.x0) / m.hx(), fy = (y - m.rect.y0) / m.hy();
  int cx = std::clamp(static_cast<int>(std::floor(fx)), 0, m.nx - 1);
  int cy = std::clamp(static_cast<int>(std::floor(fy)), 0, m.ny - 1);
  double xi = fx - cx, eta = fy - cy;
  Located loc;
  if (eta <= xi) {  // lower-right triangle
    loc.tri = 2 * (cy * m.nx + cx);
    loc.bary = {1 - xi, xi - eta, eta};
  } else {
    loc.tri = 2 * (cy * m.nx + cx) + 1;
    loc.bary = {1 - eta, xi, eta - xi};
  }
  auto verts = m.triangle_vertices(loc.tri);
  for (int i = 0; i < 3; ++i)
    loc.verts[i] = {m.rect.x0 + verts[i][0] * m.hx(), m.rect.y0 + verts[i][1] * m.hy()};
  return loc;
}

}  // namespace

Complex evaluate(const FeSpace& space, const CVec& coeffs, double x, double y) {
  if (coeffs.size() != space.dim) throw DimensionMismatch("evaluate: coefficient size");
  Located loc = locate(space, x, y);
  double vals[6];
  shape_values(space.degree, loc.bary, vals);
  const int* nd = space.element_nodes(loc.tri);
  Complex out(0);
  for (int i = 0; i < space.nodes_per_element(); ++i) out += vals[i] * coeffs[nd[i]];
  return out;
}

Eigen::Vector2cd evaluate_gradient(const FeSpace& space, const CVec& coeffs, double x, double y) {
  if (coeffs.size() != space.dim) throw DimensionMismatch("evaluate_gradient: coefficient size");
  Located loc = locate(space, x, y);
  double grads[6][2];
  shape_gradients(space.degree, loc.bary, loc.verts, grads);
  const int* nd = space.element_nodes(loc.tri);
  Eigen::Vector2cd out = Eigen::Vector2cd::Zero();
  for (int i = 0; i < space.nodes_per_element(); ++i) {
    out[0] += grads[i][0] * coeffs[nd[i]];
    out[1] += grads[i][1] * coeffs[nd[i]];
  }
  return out;
}

}  // namespace msgfem
