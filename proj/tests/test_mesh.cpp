#include <doctest.h>

#include <random>

#include "msgfem/mesh.hpp"

using namespace msgfem;

TEST_SUITE_BEGIN("mesh");

TEST_CASE("build_mesh counts") {
  auto m1 = build_mesh({0, 0, 1, 1}, 1, 1);
  CHECK(m1.n_triangles() == 2);
  CHECK(m1.n_vertices() == 4);
  auto m2 = build_mesh({0, 0, 1, 1}, 2, 2);
  CHECK(m2.n_triangles() == 8);
  CHECK(m2.n_vertices() == 9);
  auto m3 = build_mesh({0, -3, 9, 0}, 300, 100);
  CHECK(m3.n_triangles() == 60000);
  CHECK_THROWS_AS(build_mesh({0, 0, 1, 1}, 0, 3), InvalidDimensions);
}

TEST_CASE("triangles positively oriented") {
  auto m = build_mesh({0, 0, 2, 1}, 3, 2);
  for (int t = 0; t < m.n_triangles(); ++t) {
    auto v = m.triangle_vertices(t);
    const double cross = (v[1][0] - v[0][0]) * (v[2][1] - v[0][1]) -
                         (v[2][0] - v[0][0]) * (v[1][1] - v[0][1]);
    CHECK(cross > 0);
  }
}

TEST_CASE("build_space dimensions") {
  auto m = build_mesh({0, 0, 1, 1}, 2, 2);
  CHECK(build_space(m, 1).dim == 9);
  CHECK(build_space(m, 2).dim == 25);
  auto m2 = build_mesh({0, 0, 1, 1}, 4, 2);
  CHECK(build_space(m2, 2).dim == 45);
  CHECK_THROWS_AS(build_space(m, 3), UnsupportedDegree);
}

TEST_CASE("node numbering: vertices first, then midpoints, lexicographic") {
  auto m = build_mesh({0, 0, 1, 1}, 2, 2);
  auto sp = build_space(m, 2);
  // first (nx+1)(ny+1) ids are vertices in lex order
  int vid = 0;
  for (int vy = 0; vy <= 2; ++vy)
    for (int vx = 0; vx <= 2; ++vx) CHECK(sp.node(2 * vx, 2 * vy) == vid++);
  int prev = vid - 1;
  for (int ay = 0; ay <= sp.lat_ny; ++ay)
    for (int ax = 0; ax <= sp.lat_nx; ++ax) {
      if (ax % 2 == 0 && ay % 2 == 0) continue;
      CHECK(sp.node(ax, ay) == prev + 1);
      prev = sp.node(ax, ay);
    }
}

TEST_CASE("interpolate_nodal") {
  auto sp = build_space(build_mesh({0, 0, 1, 1}, 3, 3), 2);
  auto zero = interpolate_nodal(sp, [](double, double) { return Complex(0); });
  CHECK(zero.norm() == 0.0);
  auto ones = interpolate_nodal(sp, [](double, double) { return Complex(1); });
  CHECK((ones.array() - Complex(1)).matrix().norm() == 0.0);

  const double k = 7.0, kx = 0.6 * k, ky = 0.8 * k;
  auto pw = [&](double x, double y) { return std::exp(Complex(0, kx * x + ky * y)); };
  auto v = interpolate_nodal(sp, pw);
  for (int q = 0; q < sp.dim; ++q) {
    auto xy = sp.node_coord(q);
    CHECK(std::abs(v[q] - pw(xy[0], xy[1])) < 1e-15);
  }
}

TEST_CASE("evaluate and gradients") {
  auto sp1 = build_space(build_mesh({0, 0, 1, 1}, 4, 4), 1);
  auto c = interpolate_nodal(sp1, [](double, double) { return Complex(2.5); });
  CHECK(std::abs(evaluate(sp1, c, 0.37, 0.61) - Complex(2.5)) < 1e-14);

  auto lin = interpolate_nodal(sp1, [](double x, double y) { return Complex(x + 2 * y); });
  auto g = evaluate_gradient(sp1, lin, 0.3, 0.7);
  CHECK(std::abs(g[0] - Complex(1)) < 1e-13);
  CHECK(std::abs(g[1] - Complex(2)) < 1e-13);

  auto sp2 = build_space(build_mesh({0, 0, 1, 1}, 4, 4), 2);
  auto quad = interpolate_nodal(sp2, [](double x, double) { return Complex(x * x); });
  auto g2 = evaluate_gradient(sp2, quad, 0.3, 0.55);
  CHECK(std::abs(g2[0] - Complex(0.6)) < 1e-12);
  CHECK(std::abs(g2[1]) < 1e-12);
  CHECK(std::abs(evaluate(sp2, quad, 0.3, 0.55) - Complex(0.09)) < 1e-13);

  CHECK_THROWS_AS(evaluate(sp1, c, 1.5, 0.5), PointOutsideDomain);
}

TEST_CASE("lagrange partition of unity of the basis") {
  for (int degree : {1, 2}) {
    auto sp = build_space(build_mesh({0, 0, 2, 1}, 5, 3), degree);
    CVec ones = CVec::Constant(sp.dim, Complex(1));
    std::mt19937 gen(17);
    std::uniform_real_distribution<double> ux(0, 2), uy(0, 1);
    for (int trial = 0; trial < 50; ++trial) {
      const double x = ux(gen), y = uy(gen);
      CHECK(std::abs(evaluate(sp, ones, x, y) - Complex(1)) < 1e-12);
    }
  }
}

TEST_CASE("interpolation is a projection") {
  auto sp = build_space(build_mesh({0, 0, 1, 2}, 3, 4), 2);
  std::mt19937 gen(3);
  std::normal_distribution<double> d(0, 1);
  CVec v(sp.dim);
  for (int q = 0; q < sp.dim; ++q) v[q] = Complex(d(gen), d(gen));
  auto back = interpolate_nodal(sp, [&](double x, double y) { return evaluate(sp, v, x, y); });
  CHECK((back - v).norm() < 1e-12 * v.norm());
}

TEST_CASE("quadrature rules integrate monomials exactly") {
  // int_T lambda0^a lambda1^b lambda2^c = 2|T| a! b! c! / (a+b+c+2)!
  auto factorial = [](int n) {
    double f = 1;
    for (int i = 2; i <= n; ++i) f *= i;
    return f;
  };
  for (int degree : {1, 2}) {
    const TriangleRule& rule = triangle_rule(degree);
    const int exact_degree = degree == 1 ? 2 : 4;
    for (int a = 0; a <= exact_degree; ++a)
      for (int b = 0; a + b <= exact_degree; ++b) {
        const int c = exact_degree - a - b;
        double quad = 0;
        for (int q = 0; q < rule.n; ++q)
          quad += rule.weights[q] * std::pow(rule.bary[q][0], a) * std::pow(rule.bary[q][1], b) *
                  std::pow(rule.bary[q][2], c);
        const double exact =
            2.0 * factorial(a) * factorial(b) * factorial(c) / factorial(a + b + c + 2);
        CHECK(quad == doctest::Approx(exact).epsilon(1e-13));
      }
  }
  // 3-point Gauss edge rule integrates t^5 exactly
  const EdgeRule& er = edge_rule();
  for (int p = 0; p <= 5; ++p) {
    double quad = 0;
    for (int q = 0; q < er.n; ++q) quad += er.weights[q] * std::pow(er.t[q], p);
    CHECK(quad == doctest::Approx(1.0 / (p + 1)).epsilon(1e-14));
  }
}

TEST_SUITE_END();
