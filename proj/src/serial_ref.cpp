#include "msgfem/serial_ref.hpp"

#include <cmath>
#include <numeric>

namespace msgfem {
namespace ref {

CVec spmv(const ComplexSparseMatrix& A, const CVec& x) {
  if (x.size() != A.ncols) throw DimensionMismatch("ref::spmv: size mismatch");
  CVec y(A.nrows);
  for (int r = 0; r < A.nrows; ++r) {
    Complex acc(0);
    for (int i = A.offsets[r]; i < A.offsets[r + 1]; ++i) acc += A.values[i] * x[A.cols[i]];
    y[r] = acc;
  }
  return y;
}

namespace {

using Trip = std::pair<std::pair<int, int>, Complex>;
using RTrip = std::pair<std::pair<int, int>, double>;

// Boundary edges of one side, as (vertex, vertex) node pairs walking the side.
std::vector<std::array<int, 2>> side_edges(const FeSpace& sp, BoundaryTag tag) {
  const Mesh& m = sp.mesh;
  const int d = sp.degree;
  std::vector<std::array<int, 2>> edges;
  auto v = [&](int vx, int vy) { return sp.node(vx * d, vy * d); };
  switch (tag) {
    case BoundaryTag::left:
      for (int cy = 0; cy < m.ny; ++cy) edges.push_back({v(0, cy), v(0, cy + 1)});
      break;
    case BoundaryTag::right:
      for (int cy = 0; cy < m.ny; ++cy) edges.push_back({v(m.nx, cy), v(m.nx, cy + 1)});
      break;
    case BoundaryTag::bottom:
      for (int cx = 0; cx < m.nx; ++cx) edges.push_back({v(cx, 0), v(cx + 1, 0)});
      break;
    case BoundaryTag::top:
      for (int cx = 0; cx < m.nx; ++cx) edges.push_back({v(cx, m.ny), v(cx + 1, m.ny)});
      break;
  }
  return edges;
}

}  // namespace

AssembledSystem assemble_global(std::shared_ptr<const FeSpace> space, const ProblemSpec& spec) {
  const FeSpace& sp = *space;
  const Mesh& mesh = sp.mesh;
  if (!(spec.k > 0)) throw CoefficientOutOfBounds("k must be positive");

  const TriangleRule& rule = triangle_rule(sp.degree);
  const double area = 0.5 * mesh.hx() * mesh.hy();
  const int npe = sp.nodes_per_element();

  std::vector<RTrip> s_trips, m_trips, g_trips;
  for (int e = 0; e < mesh.n_triangles(); ++e) {
    auto verts = mesh.triangle_vertices(e);
    std::array<std::array<double, 2>, 3> pv;
    for (int i = 0; i < 3; ++i)
      pv[i] = {mesh.rect.x0 + verts[i][0] * mesh.hx(), mesh.rect.y0 + verts[i][1] * mesh.hy()};
    const int* nd = sp.element_nodes(e);
    for (int q = 0; q < rule.n; ++q) {
      double vals[6], grads[6][2];
      shape_values(sp.degree, rule.bary[q], vals);
      shape_gradients(sp.degree, rule.bary[q], pv, grads);
      double x = 0, y = 0;
      for (int i = 0; i < 3; ++i) {
        x += rule.bary[q][i] * pv[i][0];
        y += rule.bary[q][i] * pv[i][1];
      }
      const double wa = rule.weights[q] * area * spec.A(x, y);
      const double wv = rule.weights[q] * area * spec.V(x, y) * spec.V(x, y);
      for (int l = 0; l < npe; ++l)
        for (int j = 0; j < npe; ++j) {
          s_trips.push_back(
              {{nd[l], nd[j]}, wa * (grads[l][0] * grads[j][0] + grads[l][1] * grads[j][1])});
          m_trips.push_back({{nd[l], nd[j]}, wv * vals[l] * vals[j]});
        }
    }
  }

  const EdgeRule& erule = edge_rule();
  for (auto tag : kAllTags) {
    if (spec.bc[static_cast<int>(tag)] != BcType::impedance) continue;
    for (const auto& edge : side_edges(sp, tag)) {
      int nodes[3] = {edge[0], edge[1], -1};
      int n = 2;
      if (sp.degree == 2) {
        const auto& la = sp.lattice_of[edge[0]];
        const auto& lb = sp.lattice_of[edge[1]];
        nodes[2] = sp.node((la[0] + lb[0]) / 2, (la[1] + lb[1]) / 2);
        n = 3;
      }
      auto pa = sp.node_coord(edge[0]);
      auto pb = sp.node_coord(edge[1]);
      const double len = std::hypot(pb[0] - pa[0], pb[1] - pa[1]);
      for (int q = 0; q < erule.n; ++q) {
        const double t = erule.t[q];
        double shape[3];
        if (sp.degree == 1) {
          shape[0] = 1 - t;
          shape[1] = t;
        } else {
          shape[0] = (1 - t) * (1 - 2 * t);
          shape[1] = t * (2 * t - 1);
          shape[2] = 4 * t * (1 - t);
        }
        const double x = pa[0] + t * (pb[0] - pa[0]), y = pa[1] + t * (pb[1] - pa[1]);
        const double w = erule.weights[q] * len * spec.beta.eval(spec.k, spec.V(x, y));
        for (int a = 0; a < n; ++a)
          for (int b = 0; b < n; ++b) g_trips.push_back({{nodes[a], nodes[b]}, w * shape[a] * shape[b]});
      }
    }
  }

  AssembledSystem sys;
  sys.space = space;
  sys.spec = spec;
  sys.k = spec.k;
  sys.dirichlet.assign(sp.dim, 0);
  for (auto tag : kAllTags)
    if (spec.bc[static_cast<int>(tag)] == BcType::dirichlet0)
      for (int q : sp.boundary_nodes[static_cast<int>(tag)]) sys.dirichlet[q] = 1;

  // merge the three patterns so S, M_V, Gamma share structure
  auto pattern_union = [&](const std::vector<RTrip>& a, const std::vector<RTrip>& b,
                           const std::vector<RTrip>& c) {
    std::vector<RTrip> all;
    all.reserve(a.size() + b.size() + c.size());
    auto push_zero = [&](const std::vector<RTrip>& t) {
      for (const auto& [rc, v] : t) all.push_back({rc, 0.0});
    };
    push_zero(a);
    push_zero(b);
    push_zero(c);
    return RealSparseMatrix::from_triplets(sp.dim, sp.dim, std::move(all));
  };
  RealSparseMatrix pat = pattern_union(s_trips, m_trips, g_trips);
  auto fill = [&](const std::vector<RTrip>& trips) {
    RealSparseMatrix m = pat;
    for (const auto& [rc, v] : trips) m.add(rc.first, rc.second, v);
    return m;
  };
  sys.S = fill(s_trips);
  sys.M_V = fill(m_trips);
  sys.Gamma = fill(g_trips);

  for (auto* m : {&sys.S, &sys.M_V, &sys.Gamma}) {
    const bool unit = (m == &sys.S);
    for (int r = 0; r < m->nrows; ++r) {
      const bool dr = sys.dirichlet[r] != 0;
      for (int i = m->offsets[r]; i < m->offsets[r + 1]; ++i) {
        const bool dc = sys.dirichlet[m->cols[i]] != 0;
        if (!dr && !dc) continue;
        m->values[i] = (unit && dr && m->cols[i] == r) ? 1.0 : 0.0;
      }
    }
  }

  sys.B = to_complex(sys.S);
  const double k2 = spec.k * spec.k;
  for (std::size_t i = 0; i < sys.B.values.size(); ++i)
    sys.B.values[i] = Complex(sys.S.values[i] - k2 * sys.M_V.values[i], -spec.k * sys.Gamma.values[i]);
  sys.F = assemble_rhs(sp, spec, sys.dirichlet);
  return sys;
}

CVec apply_one_level(const Preconditioner& P, const CVec& r) {
  const DecompositionPlan& plan = P.plan();
  CVec z = CVec::Zero(r.size());
  for (int i = 0; i < plan.size(); ++i) {
    CVec rhs = plan.restrict_to(i, r);
    if (P.config().local_bc == ArtificialBc::dirichlet0)
      for (int q : P.subdomain(i).sys.interface) rhs[q] = Complex(0);
    plan.pu_multiply_add(i, P.subdomain(i).solver->solve(rhs), z);
  }
  return z;
}

CVec apply_preconditioner(const Preconditioner& P, const CVec& r) {
  switch (P.config().mode) {
    case PrecondMode::one_level_oras:
      return apply_one_level(P, r);
    case PrecondMode::coarse_only:
      return P.coarse().correct(P.plan(), r);
    case PrecondMode::two_level_hybrid: {
      CVec z = apply_one_level(P, r);
      z += P.coarse().correct(P.plan(), r - P.system().apply_B(z));
      return z;
    }
  }
  throw NotSetUp("ref::apply_preconditioner: unknown mode");
}

}  // namespace ref
}  // namespace msgfem
