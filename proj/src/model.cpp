#include "msgfem/model.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>
#include <unordered_map>

namespace msgfem {

// ---------------------------------------------------------------------------
// CoefficientField
// ---------------------------------------------------------------------------

CoefficientField CoefficientField::constant(double value) {
  CoefficientField f;
  f.kind_ = Kind::constant;
  f.value_ = f.min_ = f.max_ = value;
  return f;
}

CoefficientField CoefficientField::raster(int cells_x, int cells_y, std::vector<double> values,
                                          Rect rect) {
  if (cells_x < 1 || cells_y < 1 ||
      values.size() != static_cast<std::size_t>(cells_x) * cells_y)
    throw MalformedFile("raster: grid dimensions do not match value count");
  CoefficientField f;
  f.kind_ = Kind::raster;
  f.gx_ = cells_x;
  f.gy_ = cells_y;
  f.rect_ = rect;
  f.min_ = *std::min_element(values.begin(), values.end());
  f.max_ = *std::max_element(values.begin(), values.end());
  f.grid_ = std::make_shared<std::vector<double>>(std::move(values));
  return f;
}

CoefficientField CoefficientField::periodic_inclusions(double eps, double inner, double outer) {
  CoefficientField f;
  f.kind_ = Kind::inclusions;
  f.eps_ = eps;
  f.inner_ = inner;
  f.outer_ = outer;
  f.min_ = std::min(inner, outer);
  f.max_ = std::max(inner, outer);
  return f;
}

double CoefficientField::operator()(double x, double y) const {
  switch (kind_) {
    case Kind::constant:
      return value_;
    case Kind::raster: {
      int ix = std::clamp(static_cast<int>((x - rect_.x0) / rect_.width() * gx_), 0, gx_ - 1);
      int iy = std::clamp(static_cast<int>((y - rect_.y0) / rect_.height() * gy_), 0, gy_ - 1);
      return (*grid_)[static_cast<std::size_t>(iy) * gx_ + ix];
    }
    case Kind::inclusions: {
      if (x <= 0.25 || x >= 0.75 || y <= 0.25 || y >= 0.75) return outer_;
      double fx = x / eps_ - std::floor(x / eps_);
      double fy = y / eps_ - std::floor(y / eps_);
      return (fx > 0.25 && fx < 0.75 && fy > 0.25 && fy < 0.75) ? inner_ : outer_;
    }
  }
  return value_;
}

CoefficientField ingest_raster_velocity(const std::string& path, const Rect& rect) {
  std::ifstream in(path);
  if (!in) throw MalformedFile("cannot open raster file " + path);
  int gx, gy;
  if (!(in >> gx >> gy) || gx < 1 || gy < 1) throw MalformedFile("bad raster header in " + path);
  std::vector<double> slowness(static_cast<std::size_t>(gx) * gy);
  for (int row = 0; row < gy; ++row) {  // file rows run top to bottom
    for (int col = 0; col < gx; ++col) {
      double c;
      if (!(in >> c)) throw MalformedFile("truncated raster grid in " + path);
      if (!(c > 0)) throw NonpositiveVelocity("velocity must be positive in " + path);
      slowness[static_cast<std::size_t>(gy - 1 - row) * gx + col] = 1.0 / c;
    }
  }
  return CoefficientField::raster(gx, gy, std::move(slowness), rect);
}

// ---------------------------------------------------------------------------
// assembly helpers
// ---------------------------------------------------------------------------

namespace {

// Per triangle type: quadrature-point shape products scaled by w_q * |T|, and
// the physical offset of each quadrature point from the cell origin.
struct Kernels {
  int npe = 3, nq = 3;
  double wG[6][36];  // [q][l * npe + j]
  double wN[6][36];
  std::array<double, 2> qoff[6];
};

Kernels make_kernels(const FeSpace& space, int type) {
  const Mesh& m = space.mesh;
  Kernels k;
  k.npe = space.nodes_per_element();
  const TriangleRule& rule = triangle_rule(space.degree);
  k.nq = rule.n;
  const double area = 0.5 * m.hx() * m.hy();
  std::array<std::array<double, 2>, 3> verts;
  if (type == 0)
    verts = {{{0, 0}, {m.hx(), 0}, {m.hx(), m.hy()}}};
  else
    verts = {{{0, 0}, {m.hx(), m.hy()}, {0, m.hy()}}};
  for (int q = 0; q < k.nq; ++q) {
    double vals[6], grads[6][2];
    shape_values(space.degree, rule.bary[q], vals);
    shape_gradients(space.degree, rule.bary[q], verts, grads);
    const double w = rule.weights[q] * area;
    for (int l = 0; l < k.npe; ++l)
      for (int j = 0; j < k.npe; ++j) {
        k.wG[q][l * k.npe + j] = w * (grads[l][0] * grads[j][0] + grads[l][1] * grads[j][1]);
        k.wN[q][l * k.npe + j] = w * vals[l] * vals[j];
      }
    k.qoff[q] = {0.0, 0.0};
    for (int i = 0; i < 3; ++i) {
      k.qoff[q][0] += rule.bary[q][i] * verts[i][0];
      k.qoff[q][1] += rule.bary[q][i] * verts[i][1];
    }
  }
  return k;
}

// Pattern over the coupled node pairs of an element set; rows/cols through
// row_of (entries mapped to -1 are dropped).
std::pair<std::vector<int>, std::vector<int>> build_pattern(const FeSpace& space,
                                                            const std::vector<int>& elements,
                                                            const std::vector<int>& row_of,
                                                            int n_rows) {
  const int npe = space.nodes_per_element();
  std::vector<int> count(n_rows + 1, 0);
  for (int e : elements) {
    const int* nd = space.element_nodes(e);
    for (int i = 0; i < npe; ++i) {
      int r = row_of[nd[i]];
      if (r >= 0) count[r + 1] += npe;
    }
  }
  std::vector<int> offsets(count);
  for (int r = 0; r < n_rows; ++r) offsets[r + 1] += offsets[r];
  std::vector<int> cols(offsets[n_rows]);
  std::vector<int> cursor(offsets.begin(), offsets.end() - 1);
  for (int e : elements) {
    const int* nd = space.element_nodes(e);
    for (int i = 0; i < npe; ++i) {
      int r = row_of[nd[i]];
      if (r < 0) continue;
      for (int j = 0; j < npe; ++j) cols[cursor[r]++] = row_of[nd[j]];
    }
  }
  // compact: sort each row, drop duplicates and dropped (-1) columns
  std::vector<int> final_offsets(n_rows + 1, 0), final_cols;
  final_cols.reserve(cols.size() / 4);
  for (int r = 0; r < n_rows; ++r) {
    int* begin = cols.data() + offsets[r];
    int* end = cols.data() + cursor[r];
    std::sort(begin, end);
    int prev = -1;
    for (int* p = begin; p != end; ++p) {
      if (*p < 0 || *p == prev) continue;
      final_cols.push_back(*p);
      prev = *p;
    }
    final_offsets[r + 1] = static_cast<int>(final_cols.size());
  }
  return {std::move(final_offsets), std::move(final_cols)};
}

// Elements grouped by an 8-colouring (cell parity x triangle parity): no two
// elements of one colour share a node, so accumulation within a colour is
// race-free and the colour order fixes the floating-point reduction order.
std::array<std::vector<int>, 8> colour_elements(const Mesh& mesh,
                                                const std::vector<int>& elements) {
  std::array<std::vector<int>, 8> groups;
  for (int e : elements) {
    const int cell = mesh.cell_of(e);
    const int c = ((mesh.cell_x(cell) & 1) << 2) | ((mesh.cell_y(cell) & 1) << 1) | (e & 1);
    groups[c].push_back(e);
  }
  return groups;
}

void assemble_volume_forms(const FeSpace& space, const ProblemSpec& spec,
                           const std::vector<int>& elements, const std::vector<int>& row_of,
                           RealSparseMatrix& S, RealSparseMatrix& M) {
  const Mesh& mesh = space.mesh;
  const Kernels kern[2] = {make_kernels(space, 0), make_kernels(space, 1)};
  const int npe = space.nodes_per_element();
  auto groups = colour_elements(mesh, elements);
  for (const auto& group : groups) {
#pragma omp parallel for schedule(static)
    for (std::int64_t gi = 0; gi < static_cast<std::int64_t>(group.size()); ++gi) {
      const int e = group[gi];
      const int cell = mesh.cell_of(e);
      const double ox = mesh.rect.x0 + mesh.cell_x(cell) * mesh.hx();
      const double oy = mesh.rect.y0 + mesh.cell_y(cell) * mesh.hy();
      const Kernels& k = kern[e & 1];
      double se[36] = {0}, me[36] = {0};
      for (int q = 0; q < k.nq; ++q) {
        const double x = ox + k.qoff[q][0], y = oy + k.qoff[q][1];
        const double a = spec.A(x, y);
        const double v = spec.V(x, y);
        const double v2 = v * v;
        for (int i = 0; i < npe * npe; ++i) {
          se[i] += a * k.wG[q][i];
          me[i] += v2 * k.wN[q][i];
        }
      }
      const int* nd = space.element_nodes(e);
      for (int l = 0; l < npe; ++l) {
        const int r = row_of[nd[l]];
        if (r < 0) continue;
        for (int j = 0; j < npe; ++j) {
          const int c = row_of[nd[j]];
          if (c < 0) continue;
          S.add(r, c, se[l * npe + j]);
          M.add(r, c, me[l * npe + j]);
        }
      }
    }
  }
}

struct Edge {
  int va, vb;        // vertex node ids, va < vb
  bool physical;     // on the domain boundary
  BoundaryTag tag;   // valid when physical
};

// Boundary edges of an element set, deterministically ordered.
std::vector<Edge> region_boundary_edges(const FeSpace& space, const std::vector<int>& elements) {
  std::unordered_map<std::int64_t, int> uses;
  uses.reserve(elements.size() * 3);
  const int npe = space.nodes_per_element();
  auto key = [&](int a, int b) {
    if (a > b) std::swap(a, b);
    return static_cast<std::int64_t>(a) * space.dim + b;
  };
  for (int e : elements) {
    const int* nd = space.element_nodes(e);
    (void)npe;
    uses[key(nd[0], nd[1])]++;
    uses[key(nd[1], nd[2])]++;
    uses[key(nd[0], nd[2])]++;
  }
  std::vector<Edge> edges;
  for (const auto& [k, count] : uses) {
    if (count != 1) continue;
    Edge ed;
    ed.va = static_cast<int>(k / space.dim);
    ed.vb = static_cast<int>(k % space.dim);
    ed.physical = false;
    for (auto tag : kAllTags) {
      if (space.node_on_tag(ed.va, tag) && space.node_on_tag(ed.vb, tag)) {
        ed.physical = true;
        ed.tag = tag;
        break;
      }
    }
    edges.push_back(ed);
  }
  std::sort(edges.begin(), edges.end(), [](const Edge& a, const Edge& b) {
    return std::make_pair(a.va, a.vb) < std::make_pair(b.va, b.vb);
  });
  return edges;
}

// Nodes carried by an edge: endpoints plus (degree 2) the midpoint.
int edge_nodes(const FeSpace& space, const Edge& e, int* nodes) {
  nodes[0] = e.va;
  nodes[1] = e.vb;
  if (space.degree == 1) return 2;
  const auto& la = space.lattice_of[e.va];
  const auto& lb = space.lattice_of[e.vb];
  nodes[2] = space.node((la[0] + lb[0]) / 2, (la[1] + lb[1]) / 2);
  return 3;
}

void edge_shape(int degree, double t, double* vals) {
  if (degree == 1) {
    vals[0] = 1 - t;
    vals[1] = t;
    return;
  }
  vals[0] = (1 - t) * (1 - 2 * t);
  vals[1] = t * (2 * t - 1);
  vals[2] = 4 * t * (1 - t);
}

// Accumulates int_e coef(x) N_a N_b over one edge; serial caller keeps the
// accumulation order deterministic.
template <typename CoefFn>
void assemble_edge_mass(const FeSpace& space, const Edge& e, CoefFn&& coef,
                        const std::vector<int>& row_of, RealSparseMatrix& out) {
  int nodes[3];
  const int n = edge_nodes(space, e, nodes);
  auto pa = space.node_coord(e.va);
  auto pb = space.node_coord(e.vb);
  const double len = std::hypot(pb[0] - pa[0], pb[1] - pa[1]);
  const EdgeRule& rule = edge_rule();
  double em[9] = {0};
  for (int q = 0; q < rule.n; ++q) {
    const double t = rule.t[q];
    const double x = pa[0] + t * (pb[0] - pa[0]), y = pa[1] + t * (pb[1] - pa[1]);
    double vals[3];
    edge_shape(space.degree, t, vals);
    const double w = rule.weights[q] * len * coef(x, y);
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b) em[a * n + b] += w * vals[a] * vals[b];
  }
  for (int a = 0; a < n; ++a) {
    const int r = row_of[nodes[a]];
    if (r < 0) continue;
    for (int b = 0; b < n; ++b) {
      const int c = row_of[nodes[b]];
      if (c < 0) continue;
      out.add(r, c, em[a * n + b]);
    }
  }
}

void eliminate_rows_cols(RealSparseMatrix& A, const std::vector<std::uint8_t>& mask,
                         bool unit_diagonal) {
  for (int r = 0; r < A.nrows; ++r) {
    const bool dr = mask[r] != 0;
    for (int i = A.offsets[r]; i < A.offsets[r + 1]; ++i) {
      const bool dc = mask[A.cols[i]] != 0;
      if (!dr && !dc) continue;
      A.values[i] = (unit_diagonal && dr && A.cols[i] == r) ? 1.0 : 0.0;
    }
  }
}

ComplexSparseMatrix combine_helmholtz(const RealSparseMatrix& S, const RealSparseMatrix& M,
                                      const RealSparseMatrix& G, double k) {
  // All three share one pattern by construction.
  ComplexSparseMatrix B(S.nrows, S.ncols);
  B.offsets = S.offsets;
  B.cols = S.cols;
  B.values.resize(S.values.size());
  const double k2 = k * k;
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < static_cast<std::int64_t>(S.values.size()); ++i)
    B.values[i] = Complex(S.values[i] - k2 * M.values[i], -k * G.values[i]);
  return B;
}

template <typename F>
double deterministic_sum(std::int64_t n, F&& per_item) {
  constexpr std::int64_t chunk = 512;
  const std::int64_t n_chunks = (n + chunk - 1) / chunk;
  std::vector<double> partial(n_chunks, 0.0);
#pragma omp parallel for schedule(static)
  for (std::int64_t c = 0; c < n_chunks; ++c) {
    double acc = 0;
    const std::int64_t end = std::min(n, (c + 1) * chunk);
    for (std::int64_t i = c * chunk; i < end; ++i) acc += per_item(i);
    partial[c] = acc;
  }
  double total = 0;
  for (double p : partial) total += p;
  return total;
}

}  // namespace

// ---------------------------------------------------------------------------
// global assembly
// ---------------------------------------------------------------------------

namespace {

void validate_spec(const ProblemSpec& spec) {
  if (!(spec.k > 0)) throw CoefficientOutOfBounds("k must be positive");
  if (!(spec.A.min_value() > 0))
    throw CoefficientOutOfBounds("A violates uniform ellipticity (a_min <= 0)");
  if (!(spec.V.min_value() > 0)) throw CoefficientOutOfBounds("V must satisfy V_min > 0");
}

std::vector<std::uint8_t> dirichlet_mask(const FeSpace& space, const ProblemSpec& spec) {
  std::vector<std::uint8_t> mask(space.dim, 0);
  for (auto tag : kAllTags)
    if (spec.bc[static_cast<int>(tag)] == BcType::dirichlet0)
      for (int q : space.boundary_nodes[static_cast<int>(tag)]) mask[q] = 1;
  return mask;
}

}  // namespace

AssembledSystem assemble_global(std::shared_ptr<const FeSpace> space, const ProblemSpec& spec) {
  validate_spec(spec);
  const FeSpace& sp = *space;
  AssembledSystem sys;
  sys.space = space;
  sys.spec = spec;
  sys.k = spec.k;
  sys.dirichlet = dirichlet_mask(sp, spec);

  std::vector<int> all_elements(sp.mesh.n_triangles());
  std::iota(all_elements.begin(), all_elements.end(), 0);
  std::vector<int> identity(sp.dim);
  std::iota(identity.begin(), identity.end(), 0);

  auto [offsets, cols] = build_pattern(sp, all_elements, identity, sp.dim);
  sys.S = zeros_from_pattern<double>(sp.dim, sp.dim, offsets, cols);
  sys.M_V = zeros_from_pattern<double>(sp.dim, sp.dim, offsets, cols);
  sys.Gamma = zeros_from_pattern<double>(sp.dim, sp.dim, std::move(offsets), std::move(cols));

  assemble_volume_forms(sp, spec, all_elements, identity, sys.S, sys.M_V);

  auto edges = region_boundary_edges(sp, all_elements);
  for (const Edge& e : edges) {
    if (!e.physical) throw Error("internal: global region produced an artificial edge");
    if (spec.bc[static_cast<int>(e.tag)] != BcType::impedance) continue;
    assemble_edge_mass(
        sp, e, [&](double x, double y) { return spec.beta.eval(spec.k, spec.V(x, y)); }, identity,
        sys.Gamma);
  }

  eliminate_rows_cols(sys.S, sys.dirichlet, /*unit_diagonal=*/true);
  eliminate_rows_cols(sys.M_V, sys.dirichlet, false);
  eliminate_rows_cols(sys.Gamma, sys.dirichlet, false);
  sys.B = combine_helmholtz(sys.S, sys.M_V, sys.Gamma, spec.k);
  sys.F = assemble_rhs(sp, spec, sys.dirichlet);
  return sys;
}

CVec assemble_rhs(const FeSpace& space, const ProblemSpec& spec,
                  const std::vector<std::uint8_t>& dirichlet) {
  CVec F = CVec::Zero(space.dim);
  const Mesh& mesh = space.mesh;
  if (spec.f) {
    const TriangleRule& rule = triangle_rule(space.degree);
    const double area = 0.5 * mesh.hx() * mesh.hy();
    const int npe = space.nodes_per_element();
    for (int e = 0; e < mesh.n_triangles(); ++e) {
      auto verts = mesh.triangle_vertices(e);
      std::array<std::array<double, 2>, 3> pv;
      for (int i = 0; i < 3; ++i)
        pv[i] = {mesh.rect.x0 + verts[i][0] * mesh.hx(), mesh.rect.y0 + verts[i][1] * mesh.hy()};
      const int* nd = space.element_nodes(e);
      for (int q = 0; q < rule.n; ++q) {
        double x = 0, y = 0, vals[6];
        for (int i = 0; i < 3; ++i) {
          x += rule.bary[q][i] * pv[i][0];
          y += rule.bary[q][i] * pv[i][1];
        }
        shape_values(space.degree, rule.bary[q], vals);
        const Complex fw = spec.f(x, y) * (rule.weights[q] * area);
        for (int i = 0; i < npe; ++i) F[nd[i]] += fw * vals[i];
      }
    }
  }
  if (spec.point_source) {
    const PointSource& ps = *spec.point_source;
    const double step_x = mesh.hx() / space.degree, step_y = mesh.hy() / space.degree;
    int ax = std::clamp(static_cast<int>(std::lround((ps.x - mesh.rect.x0) / step_x)), 0,
                        space.lat_nx);
    int ay = std::clamp(static_cast<int>(std::lround((ps.y - mesh.rect.y0) / step_y)), 0,
                        space.lat_ny);
    F[space.node(ax, ay)] += ps.amplitude;
  }
  if (spec.g) {
    std::vector<int> all_elements(mesh.n_triangles());
    std::iota(all_elements.begin(), all_elements.end(), 0);
    auto edges = region_boundary_edges(space, all_elements);
    const EdgeRule& rule = edge_rule();
    for (const Edge& e : edges) {
      if (spec.bc[static_cast<int>(e.tag)] != BcType::impedance) continue;
      int nodes[3];
      const int n = edge_nodes(space, e, nodes);
      auto pa = space.node_coord(e.va);
      auto pb = space.node_coord(e.vb);
      const double len = std::hypot(pb[0] - pa[0], pb[1] - pa[1]);
      for (int q = 0; q < rule.n; ++q) {
        const double t = rule.t[q];
        double vals[3];
        edge_shape(space.degree, t, vals);
        const Complex gw = spec.g(pa[0] + t * (pb[0] - pa[0]), pa[1] + t * (pb[1] - pa[1]), e.tag) *
                           (rule.weights[q] * len);
        for (int a = 0; a < n; ++a) F[nodes[a]] += gw * vals[a];
      }
    }
  }
  for (int q = 0; q < space.dim; ++q)
    if (dirichlet[q]) F[q] = Complex(0);
  return F;
}

CVec AssembledSystem::apply_MAk(const CVec& v) const {
  return S.multiply_complex(v) + (k * k) * M_V.multiply_complex(v);
}

RealSparseMatrix AssembledSystem::M_Ak() const {
  RealSparseMatrix out = S;
  const double k2 = k * k;
  for (std::size_t i = 0; i < out.values.size(); ++i) out.values[i] += k2 * M_V.values[i];
  return out;
}

double energy_norm(const AssembledSystem& system, const CVec& v, EnergyMode mode) {
  if (v.size() != system.S.nrows) throw DimensionMismatch("energy_norm: vector size");
  CVec w = system.S.multiply_complex(v);
  if (mode == EnergyMode::Ak) w += (system.k * system.k) * system.M_V.multiply_complex(v);
  return std::sqrt(std::max(0.0, std::real(v.dot(w))));
}

// ---------------------------------------------------------------------------
// local systems
// ---------------------------------------------------------------------------

namespace {

std::vector<int> gather_region_nodes(const FeSpace& space, const std::vector<int>& elements,
                                     const std::vector<std::uint8_t>* global_dirichlet) {
  std::vector<int> nodes;
  nodes.reserve(elements.size() * 4);
  const int npe = space.nodes_per_element();
  for (int e : elements) {
    const int* nd = space.element_nodes(e);
    nodes.insert(nodes.end(), nd, nd + npe);
  }
  std::sort(nodes.begin(), nodes.end());
  nodes.erase(std::unique(nodes.begin(), nodes.end()), nodes.end());
  if (global_dirichlet != nullptr)
    nodes.erase(std::remove_if(nodes.begin(), nodes.end(),
                               [&](int q) { return (*global_dirichlet)[q] != 0; }),
                nodes.end());
  return nodes;
}

}  // namespace

LocalSystem assemble_local_system(const FeSpace& space, const ProblemSpec& spec,
                                  const std::vector<int>& elements, ArtificialBc mode,
                                  const std::vector<std::uint8_t>* global_dirichlet) {
  if (elements.empty()) throw EmptyRegion("assemble_local_system: empty element set");
  LocalSystem loc;
  loc.mode = mode;
  loc.nodes = gather_region_nodes(space, elements, global_dirichlet);
  const int n = loc.dim();

  std::vector<int> row_of(space.dim, -1);
  for (int i = 0; i < n; ++i) row_of[loc.nodes[i]] = i;

  auto [offsets, cols] = build_pattern(space, elements, row_of, n);
  loc.S = zeros_from_pattern<double>(n, n, offsets, cols);
  loc.M = zeros_from_pattern<double>(n, n, offsets, cols);
  RealSparseMatrix g_phys = zeros_from_pattern<double>(n, n, offsets, cols);
  RealSparseMatrix g_art = zeros_from_pattern<double>(n, n, std::move(offsets), std::move(cols));

  assemble_volume_forms(space, spec, elements, row_of, loc.S, loc.M);

  auto edges = region_boundary_edges(space, elements);
  loc.is_interface.assign(n, 0);
  for (const Edge& e : edges) {
    if (e.physical) {
      if (spec.bc[static_cast<int>(e.tag)] != BcType::impedance) continue;  // Dirichlet side
      assemble_edge_mass(
          space, e, [&](double x, double y) { return spec.beta.eval(spec.k, spec.V(x, y)); },
          row_of, g_phys);
    } else {
      assemble_edge_mass(
          space, e, [&](double x, double y) { return spec.V(x, y); }, row_of, g_art);
      int nodes[3];
      const int count = edge_nodes(space, e, nodes);
      for (int i = 0; i < count; ++i)
        if (row_of[nodes[i]] >= 0) loc.is_interface[row_of[nodes[i]]] = 1;
    }
  }
  for (int i = 0; i < n; ++i)
    if (loc.is_interface[i]) loc.interface.push_back(i);

  loc.B_phys = combine_helmholtz(loc.S, loc.M, g_phys, spec.k);
  if (mode == ArtificialBc::impedance_ikV) {
    RealSparseMatrix g_total = g_phys;
    for (std::size_t i = 0; i < g_total.values.size(); ++i) g_total.values[i] += g_art.values[i];
    loc.B_loc = combine_helmholtz(loc.S, loc.M, g_total, spec.k);
  } else {
    loc.B_loc = loc.B_phys;
    // eliminate artificial-boundary rows/columns with unit diagonal
    for (int r = 0; r < n; ++r) {
      const bool dr = loc.is_interface[r] != 0;
      for (int i = loc.B_loc.offsets[r]; i < loc.B_loc.offsets[r + 1]; ++i) {
        const bool dc = loc.is_interface[loc.B_loc.cols[i]] != 0;
        if (!dr && !dc) continue;
        loc.B_loc.values[i] = (dr && loc.B_loc.cols[i] == r) ? Complex(1) : Complex(0);
      }
    }
  }
  return loc;
}

ComplexSparseMatrix assemble_local(const FeSpace& space, const ProblemSpec& spec,
                                   const std::vector<int>& elements, ArtificialBc mode) {
  return assemble_local_system(space, spec, elements, mode).B_loc;
}

RegionForms assemble_region_forms(const FeSpace& space, const ProblemSpec& spec,
                                  const std::vector<int>& elements,
                                  const std::vector<std::uint8_t>* global_dirichlet) {
  if (elements.empty()) throw EmptyRegion("assemble_region_forms: empty element set");
  RegionForms rf;
  rf.nodes = gather_region_nodes(space, elements, global_dirichlet);
  const int n = static_cast<int>(rf.nodes.size());
  std::vector<int> row_of(space.dim, -1);
  for (int i = 0; i < n; ++i) row_of[rf.nodes[i]] = i;
  auto [offsets, cols] = build_pattern(space, elements, row_of, n);
  rf.S = zeros_from_pattern<double>(n, n, offsets, cols);
  rf.M = zeros_from_pattern<double>(n, n, std::move(offsets), std::move(cols));
  assemble_volume_forms(space, spec, elements, row_of, rf.S, rf.M);
  return rf;
}

double region_energy_norm(const RegionForms& forms, double k, const CVec& w_global,
                          EnergyMode mode) {
  const int n = static_cast<int>(forms.nodes.size());
  CVec w(n);
  for (int i = 0; i < n; ++i) w[i] = w_global[forms.nodes[i]];
  CVec sw = forms.S.multiply_complex(w);
  if (mode == EnergyMode::Ak) sw += (k * k) * forms.M.multiply_complex(w);
  return std::sqrt(std::max(0.0, std::real(w.dot(sw))));
}

// ---------------------------------------------------------------------------
// error measurement
// ---------------------------------------------------------------------------

double h1_seminorm(const FeSpace& space, const CVec& v) {
  return h1_seminorm_error(space, v,
                           [](double, double) { return Eigen::Vector2cd::Zero().eval(); });
}

double h1_seminorm_error(const FeSpace& space, const CVec& v,
                         const std::function<Eigen::Vector2cd(double, double)>& grad_exact) {
  const Mesh& mesh = space.mesh;
  const TriangleRule& rule = triangle_rule(space.degree);
  const double area = 0.5 * mesh.hx() * mesh.hy();
  const int npe = space.nodes_per_element();

  // precompute per-type shape gradients at quadrature points
  double grads[2][6][6][2];
  std::array<double, 2> qoff[2][6];
  for (int type = 0; type < 2; ++type) {
    std::array<std::array<double, 2>, 3> verts;
    if (type == 0)
      verts = {{{0, 0}, {mesh.hx(), 0}, {mesh.hx(), mesh.hy()}}};
    else
      verts = {{{0, 0}, {mesh.hx(), mesh.hy()}, {0, mesh.hy()}}};
    for (int q = 0; q < rule.n; ++q) {
      shape_gradients(space.degree, rule.bary[q], verts, grads[type][q]);
      qoff[type][q] = {0, 0};
      for (int i = 0; i < 3; ++i) {
        qoff[type][q][0] += rule.bary[q][i] * verts[i][0];
        qoff[type][q][1] += rule.bary[q][i] * verts[i][1];
      }
    }
  }

  double total = deterministic_sum(mesh.n_triangles(), [&](std::int64_t e) {
    const int cell = mesh.cell_of(static_cast<int>(e));
    const double ox = mesh.rect.x0 + mesh.cell_x(cell) * mesh.hx();
    const double oy = mesh.rect.y0 + mesh.cell_y(cell) * mesh.hy();
    const int type = static_cast<int>(e & 1);
    const int* nd = space.element_nodes(static_cast<int>(e));
    double acc = 0;
    for (int q = 0; q < rule.n; ++q) {
      Complex gx(0), gy(0);
      for (int i = 0; i < npe; ++i) {
        gx += grads[type][q][i][0] * v[nd[i]];
        gy += grads[type][q][i][1] * v[nd[i]];
      }
      const Eigen::Vector2cd ge = grad_exact(ox + qoff[type][q][0], oy + qoff[type][q][1]);
      acc += rule.weights[q] * area * (std::norm(gx - ge[0]) + std::norm(gy - ge[1]));
    }
    return acc;
  });
  return std::sqrt(total);
}

}  // namespace msgfem
