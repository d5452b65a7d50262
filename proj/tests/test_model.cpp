#include <doctest.h>

#include <cstdio>
#include <fstream>
#include <random>

#include "msgfem/model.hpp"
#include "msgfem/serial_ref.hpp"

using namespace msgfem;

namespace {

std::shared_ptr<const FeSpace> make_space(int nx, int ny, int degree, Rect r = {0, 0, 1, 1}) {
  return std::make_shared<FeSpace>(build_space(build_mesh(r, nx, ny), degree));
}

CVec random_cvec(int n, unsigned seed) {
  std::mt19937 gen(seed);
  std::normal_distribution<double> d(0.0, 1.0);
  CVec v(n);
  for (int i = 0; i < n; ++i) v[i] = Complex(d(gen), d(gen));
  return v;
}

}  // namespace

TEST_SUITE_BEGIN("model");

TEST_CASE("spec validation rejects k <= 0 and bad coefficients") {
  auto sp = make_space(2, 2, 1);
  ProblemSpec spec;
  spec.k = 0.0;
  CHECK_THROWS_AS(assemble_global(sp, spec), CoefficientOutOfBounds);
  spec.k = 1.0;
  spec.A = CoefficientField::constant(-1.0);
  CHECK_THROWS_AS(assemble_global(sp, spec), CoefficientOutOfBounds);
}

TEST_CASE("unit-cell P1 entries match symbolic triangle integrals") {
  auto sp = make_space(1, 1, 1);
  ProblemSpec spec;
  spec.k = 1.0;
  auto sys = assemble_global(sp, spec);

  // nodes: 0=(0,0) 1=(1,0) 2=(0,1) 3=(1,1); diagonal 0-3
  RMat S_exact(4, 4), M_exact(4, 4), G_exact(4, 4);
  S_exact << 1, -0.5, -0.5, 0, -0.5, 1, 0, -0.5, -0.5, 0, 1, -0.5, 0, -0.5, -0.5, 1;
  const double a = 1.0 / 6, b = 1.0 / 12, c = 1.0 / 24;
  M_exact << a, c, c, b, c, b, 0, c, c, 0, b, c, b, c, c, a;
  const double d2 = 2.0 / 3, o = 1.0 / 6;
  G_exact << d2, o, o, 0, o, d2, 0, o, o, 0, d2, o, 0, o, o, d2;

  CHECK((sys.S.to_dense() - S_exact).norm() < 1e-14);
  CHECK((sys.M_V.to_dense() - M_exact).norm() < 1e-14);
  CHECK((sys.Gamma.to_dense() - G_exact).norm() < 1e-14);
  CMat B_exact = S_exact.cast<Complex>() - M_exact.cast<Complex>() -
                 Complex(0, 1) * G_exact.cast<Complex>();
  CHECK((sys.B.to_dense() - B_exact).norm() < 1e-14);
}

TEST_CASE("stiffness annihilates constants") {
  auto sp = make_space(5, 4, 2);
  ProblemSpec spec;
  spec.k = 3.0;
  auto sys = assemble_global(sp, spec);
  CVec ones = CVec::Constant(sp->dim, Complex(1));
  CVec lhs = sys.apply_B(ones);
  CVec rhs = -Complex(spec.k * spec.k, 0) * sys.M_V.multiply_complex(ones) -
             Complex(0, spec.k) * sys.Gamma.multiply_complex(ones);
  CHECK((lhs - rhs).norm() < 1e-12 * rhs.norm());
  CHECK(sys.S.multiply_complex(ones).norm() < 1e-12);
}

TEST_CASE("decomposition identity and Garding sign") {
  auto sp = make_space(6, 5, 2);
  ProblemSpec spec;
  spec.k = 4.0;
  spec.V = CoefficientField::constant(1.3);
  auto sys = assemble_global(sp, spec);
  // entrywise reassembly
  for (int r = 0; r < sys.B.nrows; ++r)
    for (int i = sys.B.offsets[r]; i < sys.B.offsets[r + 1]; ++i) {
      const int c = sys.B.cols[i];
      const Complex expect(sys.S.coeff(r, c) - spec.k * spec.k * sys.M_V.coeff(r, c),
                           -spec.k * sys.Gamma.coeff(r, c));
      CHECK(std::abs(sys.B.values[i] - expect) == 0.0);
    }
  for (unsigned seed : {1u, 2u, 3u}) {
    CVec v = random_cvec(sp->dim, seed);
    CHECK(std::real(v.dot(sys.apply_MAk(v))) > 0);
  }
}

TEST_CASE("matrix-level sesquilinearity") {
  auto sp = make_space(4, 4, 1);
  ProblemSpec spec;
  spec.k = 2.0;
  auto sys = assemble_global(sp, spec);
  CVec u = random_cvec(sp->dim, 5), v = random_cvec(sp->dim, 6);
  const Complex alpha(0.8, -1.7);
  auto form = [&](const CVec& a, const CVec& b) { return b.dot(sys.apply_B(a)); };
  CHECK(std::abs(form(alpha * u, v) - alpha * form(u, v)) < 1e-12 * std::abs(form(u, v)));
  CHECK(std::abs(form(u, alpha * v) - std::conj(alpha) * form(u, v)) <
        1e-12 * std::abs(form(u, v)));
}

TEST_CASE("production assembly equals serial reference") {
  auto sp = make_space(7, 6, 2);
  ProblemSpec spec;
  spec.k = 5.0;
  spec.A = CoefficientField::periodic_inclusions(0.25, 2.0, 1.0);
  spec.V = CoefficientField::constant(0.9);
  spec.beta = {BoundaryField::Kind::k_times_V, 0.0};
  spec.bc[static_cast<int>(BoundaryTag::top)] = BcType::dirichlet0;
  spec.g = [](double x, double, BoundaryTag) { return Complex(x, -x); };
  spec.f = [](double x, double y) { return Complex(x * y, 1.0); };
  auto sys = assemble_global(sp, spec);
  auto ref_sys = ref::assemble_global(sp, spec);
  CHECK((sys.B.to_dense() - ref_sys.B.to_dense()).norm() < 1e-13 * ref_sys.B.to_dense().norm());
  CHECK((sys.F - ref_sys.F).norm() < 1e-13 * ref_sys.F.norm());
}

TEST_CASE("energy norms") {
  auto sp = make_space(8, 8, 1);
  ProblemSpec spec;
  spec.k = 6.0;
  auto sys = assemble_global(sp, spec);
  CHECK(energy_norm(sys, CVec::Zero(sp->dim), EnergyMode::Ak) == 0.0);
  CVec ones = CVec::Constant(sp->dim, Complex(1));
  CHECK(energy_norm(sys, ones, EnergyMode::A) < 1e-11);
  // ||1||_{A,k} = k ||V||_{L2}; V = 1 on the unit square
  CHECK(energy_norm(sys, ones, EnergyMode::Ak) == doctest::Approx(spec.k).epsilon(1e-12));

  // random vector against direct quadrature of |grad v|^2 and |v|^2; the
  // degree-4 rule keeps every sample strictly inside its element, where
  // evaluate_gradient is single-valued
  CVec v = random_cvec(sp->dim, 12);
  const TriangleRule& rule = triangle_rule(2);
  const Mesh& mesh = sp->mesh;
  double grad2 = 0, val2 = 0;
  for (int e = 0; e < mesh.n_triangles(); ++e) {
    auto verts = mesh.triangle_vertices(e);
    for (int q = 0; q < rule.n; ++q) {
      double x = 0, y = 0;
      for (int i = 0; i < 3; ++i) {
        x += rule.bary[q][i] * (mesh.rect.x0 + verts[i][0] * mesh.hx());
        y += rule.bary[q][i] * (mesh.rect.y0 + verts[i][1] * mesh.hy());
      }
      auto g = evaluate_gradient(*sp, v, x, y);
      const double w = rule.weights[q] * 0.5 * mesh.hx() * mesh.hy();
      grad2 += w * (std::norm(g[0]) + std::norm(g[1]));
      val2 += w * std::norm(evaluate(*sp, v, x, y));
    }
  }
  CHECK(energy_norm(sys, v, EnergyMode::A) == doctest::Approx(std::sqrt(grad2)).epsilon(1e-10));
  CHECK(energy_norm(sys, v, EnergyMode::Ak) ==
        doctest::Approx(std::sqrt(grad2 + spec.k * spec.k * val2)).epsilon(1e-10));
}

TEST_CASE("local assembly: whole domain equals global B") {
  auto sp = make_space(4, 4, 2);
  ProblemSpec spec;
  spec.k = 3.0;
  auto sys = assemble_global(sp, spec);
  std::vector<int> all(sp->mesh.n_triangles());
  for (int e = 0; e < sp->mesh.n_triangles(); ++e) all[e] = e;
  auto B_loc = assemble_local(*sp, spec, all, ArtificialBc::impedance_ikV);
  CHECK((B_loc.to_dense() - sys.B.to_dense()).norm() < 1e-13 * sys.B.to_dense().norm());
  CHECK_THROWS_AS(assemble_local(*sp, spec, {}, ArtificialBc::impedance_ikV), EmptyRegion);
}

TEST_CASE("local assembly: artificial boundary uses V, not beta") {
  auto sp = make_space(6, 6, 1);
  ProblemSpec spec;
  spec.k = 2.0;
  spec.V = CoefficientField::constant(2.0);
  spec.beta = {BoundaryField::Kind::constant, 5.0};
  // one interior cell (2,2) -> triangles 2*(2*6+2), +1
  std::vector<int> region = {2 * (2 * 6 + 2), 2 * (2 * 6 + 2) + 1};
  auto loc = assemble_local_system(*sp, spec, region, ArtificialBc::impedance_ikV);
  // imaginary part of B_loc = -k * V * edge mass; each cell edge has length
  // h = 1/6, P1 edge mass diag = 2|e|/6, and each corner joins two edges.
  // diagonal edge contributes with length sqrt(2) h.
  const double h = 1.0 / 6.0, v = 2.0;
  const double expected_corner = -spec.k * v * (2.0 / 6.0) * (2 * h + std::sqrt(2.0) * h);
  // corner node on the diagonal: two straight edges + diagonal edge
  int corner_local = -1;
  for (int i = 0; i < loc.dim(); ++i)
    if (sp->lattice_of[loc.nodes[i]][0] == 2 && sp->lattice_of[loc.nodes[i]][1] == 2)
      corner_local = i;
  REQUIRE(corner_local >= 0);
  CHECK(std::imag(loc.B_loc.coeff(corner_local, corner_local)) ==
        doctest::Approx(expected_corner).epsilon(1e-12));
  // no dependence on beta anywhere (interior region): recompute with other beta
  ProblemSpec spec2 = spec;
  spec2.beta = {BoundaryField::Kind::constant, 99.0};
  auto loc2 = assemble_local_system(*sp, spec2, region, ArtificialBc::impedance_ikV);
  CHECK((loc.B_loc.to_dense() - loc2.B_loc.to_dense()).norm() == 0.0);
}

TEST_CASE("local assembly: dirichlet mode reduces to interior block") {
  auto sp = make_space(6, 6, 2);
  ProblemSpec spec;
  spec.k = 2.5;
  std::vector<int> region = {2 * (3 * 6 + 3), 2 * (3 * 6 + 3) + 1};  // one interior cell
  auto loc = assemble_local_system(*sp, spec, region, ArtificialBc::dirichlet0);
  // P2 single cell: the diagonal midpoint is the only non-interface node
  REQUIRE(loc.interface.size() == loc.nodes.size() - 1);
  int center = -1;
  for (int i = 0; i < loc.dim(); ++i)
    if (!loc.is_interface[i]) center = i;
  REQUIRE(center >= 0);
  const Complex b_cc = loc.B_loc.coeff(center, center);
  const double expect =
      loc.S.coeff(center, center) - spec.k * spec.k * loc.M.coeff(center, center);
  CHECK(std::real(b_cc) == doctest::Approx(expect).epsilon(1e-13));
  CHECK(std::imag(b_cc) == 0.0);
  // interface rows are identity
  for (int q : loc.interface) {
    CHECK(loc.B_loc.coeff(q, q) == Complex(1));
    for (int i = loc.B_loc.offsets[q]; i < loc.B_loc.offsets[q + 1]; ++i)
      if (loc.B_loc.cols[i] != q) CHECK(loc.B_loc.values[i] == Complex(0));
  }
}

TEST_CASE("local/global consistency over a non-overlapping partition") {
  auto sp = make_space(4, 4, 2);
  ProblemSpec spec;
  spec.k = 2.0;
  auto sys = assemble_global(sp, spec);
  std::vector<int> left, right;
  for (int e = 0; e < sp->mesh.n_triangles(); ++e) {
    const int cx = sp->mesh.cell_x(sp->mesh.cell_of(e));
    (cx < 2 ? left : right).push_back(e);
  }
  CMat sum = CMat::Zero(sp->dim, sp->dim);
  for (const auto* region : {&left, &right}) {
    auto loc = assemble_local_system(*sp, spec, *region, ArtificialBc::impedance_ikV);
    CMat dense = loc.B_phys.to_dense();  // artificial terms removed
    for (int r = 0; r < loc.dim(); ++r)
      for (int c = 0; c < loc.dim(); ++c) sum(loc.nodes[r], loc.nodes[c]) += dense(r, c);
  }
  CHECK((sum - sys.B.to_dense()).norm() < 1e-13 * sum.norm());
}

TEST_CASE("raster ingestion") {
  const std::string path = "raster_test.csv";
  {
    std::ofstream out(path);
    out << "2 2\n10 20\n30 40\n";
  }
  auto f = ingest_raster_velocity(path, {0, 0, 1, 1});
  // top row of the file is the top of the domain
  CHECK(f(0.25, 0.75) == doctest::Approx(1.0 / 10));
  CHECK(f(0.75, 0.75) == doctest::Approx(1.0 / 20));
  CHECK(f(0.25, 0.25) == doctest::Approx(1.0 / 30));
  CHECK(f(0.75, 0.25) == doctest::Approx(1.0 / 40));

  {
    std::ofstream out(path);
    out << "1 1\n4.0\n";
  }
  auto c = ingest_raster_velocity(path, {0, 0, 1, 1});
  CHECK(c(0.5, 0.5) == doctest::Approx(0.25));

  // synthetic ramp against a direct indexing oracle
  {
    std::ofstream out(path);
    out << "8 4\n";
    for (int row = 0; row < 4; ++row) {
      for (int col = 0; col < 8; ++col) out << (1.0 + row * 8 + col) << " ";
      out << "\n";
    }
  }
  auto ramp = ingest_raster_velocity(path, {0, -1, 2, 0});
  std::mt19937 gen(4);
  std::uniform_real_distribution<double> ux(0, 2), uy(-1, 0);
  for (int t = 0; t < 100; ++t) {
    const double x = ux(gen), y = uy(gen);
    const int col = std::min(7, static_cast<int>(x / 2 * 8));
    const int row_from_top = std::min(3, static_cast<int>((0 - y) / 1 * 4));
    const double vel = 1.0 + row_from_top * 8 + col;
    CHECK(ramp(x, y) == doctest::Approx(1.0 / vel));
  }

  {
    std::ofstream out(path);
    out << "2 2\n1 2\n3\n";
  }
  CHECK_THROWS_AS(ingest_raster_velocity(path, {0, 0, 1, 1}), MalformedFile);
  {
    std::ofstream out(path);
    out << "1 1\n-3\n";
  }
  CHECK_THROWS_AS(ingest_raster_velocity(path, {0, 0, 1, 1}), NonpositiveVelocity);
  std::remove(path.c_str());
}

TEST_CASE("point source lands on the nearest node") {
  auto sp = make_space(4, 4, 1);
  ProblemSpec spec;
  spec.k = 1.0;
  spec.point_source = PointSource{0.26, 0.51, Complex(1, 0)};
  auto sys = assemble_global(sp, spec);
  const int expected = sp->node(1, 2);  // nearest lattice point of (0.25, 0.5)
  for (int q = 0; q < sp->dim; ++q)
    CHECK(sys.F[q] == (q == expected ? Complex(1, 0) : Complex(0, 0)));
}

TEST_CASE("dirichlet elimination") {
  auto sp = make_space(4, 4, 1);
  ProblemSpec spec;
  spec.k = 2.0;
  spec.bc[static_cast<int>(BoundaryTag::top)] = BcType::dirichlet0;
  spec.f = [](double, double) { return Complex(1); };
  auto sys = assemble_global(sp, spec);
  for (int q : sp->boundary_nodes[static_cast<int>(BoundaryTag::top)]) {
    CHECK(sys.dirichlet[q] == 1);
    CHECK(sys.B.coeff(q, q) == Complex(1));
    CHECK(sys.F[q] == Complex(0));
    for (int i = sys.B.offsets[q]; i < sys.B.offsets[q + 1]; ++i)
      if (sys.B.cols[i] != q) CHECK(sys.B.values[i] == Complex(0));
  }
}

TEST_SUITE_END();
