#include <doctest.h>

#include <stripeforge/element.hpp>
#include <stripeforge/error.hpp>
#include <stripeforge/shell_model.hpp>

#include "oracle_values.hpp"

#include <algorithm>
#include <random>

using namespace stripeforge;
using namespace stripeforge::fem;

TEST_SUITE("prism") {
  TEST_CASE("interpolation and partition of unity") {
    const Vec3 nodes[6] = {Vec3(0, 0, -1), Vec3(1, 0, -1), Vec3(0, 1, -1),
                           Vec3(0, 0, 1),  Vec3(1, 0, 1),  Vec3(0, 1, 1)};
    for (int a = 0; a < 6; ++a) {
      const PrismShape s = prism_shape(nodes[a]);
      CHECK((s.N - Vec6::Unit(a)).norm() == 0.0);
    }
    const PrismShape c = prism_shape(Vec3(1.0 / 3, 1.0 / 3, 0));
    CHECK((c.N - Vec6::Constant(1.0 / 6)).norm() < 1e-15);
    std::mt19937 rng(3);
    std::uniform_real_distribution<double> u(0, 1);
    for (int k = 0; k < 50; ++k) {
      double a = u(rng), b = u(rng);
      if (a + b > 1) {
        a = 1 - a;
        b = 1 - b;
      }
      const Vec3 q(a, b, 2 * u(rng) - 1);
      const PrismShape s = prism_shape(q);
      CHECK(std::abs(s.N.sum() - 1.0) <= 1e-14);
      CHECK(s.dN.colwise().sum().norm() <= 1e-14);
      for (int d = 0; d < 3; ++d) {
        Vec3 qp = q, qm = q;
        qp[d] += 1e-6;
        qm[d] -= 1e-6;
        const Vec6 fd = (prism_shape(qp).N - prism_shape(qm).N) / 2e-6;
        CHECK((fd - s.dN.col(d)).norm() <= 1e-9);
      }
    }
  }

  TEST_CASE("quadrature weights sum to the reference volume") {
    CHECK(default_plan().weight_sum() == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(cut_plan().weight_sum() == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(refined_plan().weight_sum() == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(default_plan().size() == 6);
  }

  TEST_CASE("subdivision of a symmetric cut") {
    const CutGeometry g = cut_subdivide(Vec3(1, 1, -1));
    REQUIRE(g.cut);
    CHECK(g.lone == 2);
    CHECK(g.s[0] == doctest::Approx(0.5));
    CHECK(g.s[1] == doctest::Approx(0.5));
    std::array<double, 3> f = g.area_fraction;
    std::sort(f.begin(), f.end());
    CHECK(f[0] == doctest::Approx(0.25).epsilon(1e-15));
    CHECK(f[1] == doctest::Approx(0.25).epsilon(1e-15));
    CHECK(f[2] == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(g.side[0] == -1);
    CHECK(g.side[1] == 1);
    CHECK_FALSE(cut_subdivide(Vec3(1, 1, 1e-3)).cut);
  }

  TEST_CASE("sub-areas partition the parent") {
    std::mt19937 rng(5);
    std::uniform_real_distribution<double> u(-1, 1);
    for (int k = 0; k < 50; ++k) {
      const Vec3 phi(u(rng), u(rng), u(rng));
      const CutGeometry g = cut_subdivide(phi);
      if (!g.cut) continue;
      CHECK(std::abs(g.area_fraction[0] + g.area_fraction[1] + g.area_fraction[2] - 1.0) <= 1e-12);
      for (double a : g.area_fraction) CHECK(a >= 0.0);
    }
  }

  TEST_CASE("exact zeros count as positive") {
    CHECK(sanitize_level_set(Vec3(0, -1, 2))[0] == 1e-9);
    CHECK(cut_subdivide(Vec3(0, -1, -1)).lone == 0);
  }

  TEST_CASE("ridge function") {
    CHECK(ridge_enrichment(Vec3::Constant(1.0 / 3), Vec3(1, -1, 1)) ==
          doctest::Approx(oracle::kRidgeBarycenter).epsilon(1e-15));
    CHECK(ridge_enrichment(Vec3(0.2, 0.5, 0.3), Vec3(2, 2, 2)) == 0.0);
    for (int a = 0; a < 3; ++a) CHECK(ridge_enrichment(Vec3::Unit(a), Vec3(0.4, -1, 0.7)) == 0.0);
    std::mt19937 rng(2);
    std::uniform_real_distribution<double> u(0, 1);
    for (int k = 0; k < 100; ++k) {
      Vec3 L(u(rng), u(rng), u(rng));
      L /= L.sum();
      CHECK(ridge_enrichment(L, Vec3(0.3, -0.9, 0.2)) >= 0.0);
    }
  }

  TEST_CASE("flat extrusion") {
    const mesh::TriMesh g = mesh::make_grid(3, 3);
    const ShellModel s = extrude_shell(g, 2e-3, mesh::vertex_normals(g), Material{}, Material{});
    for (int i = 0; i < g.num_vertices(); ++i) {
      CHECK(s.X(i, 2) == doctest::Approx(-1e-3).epsilon(1e-15));
      CHECK(s.X(g.num_vertices() + i, 2) == doctest::Approx(1e-3).epsilon(1e-15));
    }
    CHECK_THROWS_AS(extrude_shell(g, 0.0, mesh::vertex_normals(g), Material{}, Material{}), ValidationError);
    CHECK_THROWS_AS(extrude_shell(g, -1.0, mesh::vertex_normals(g), Material{}, Material{}), ValidationError);
  }

  TEST_CASE("cylinder extrusion volumes match shell slices") {
    const double r = 0.1, h = 0.6e-3, ang = 0.7, len = 0.05;
    const int na = 32, ny = 3;
    const mesh::TriMesh c = mesh::make_cylinder(r, ang, len, na, ny);
    const ShellModel s = extrude_shell(c, h, mesh::vertex_normals(c), Material{}, Material{});
    const double slice = (ang / na) * r * h * (len / ny);
    for (int e = 0; e < s.num_elements(); e += 2) {
      const double v = prism_volume(s.gather(s.X, e), s.plan_uncut) + prism_volume(s.gather(s.X, e + 1), s.plan_uncut);
      CHECK(std::abs(v - slice) <= 1e-4 * slice);
    }
  }

  TEST_CASE("sub-prism volumes partition the parent volume") {
    const mesh::TriMesh c = mesh::make_cylinder(0.2, 1.0, 0.1, 6, 2);
    const ShellModel s = extrude_shell(c, 0.01, mesh::vertex_normals(c), Material{}, Material{});
    const Mat63 X = s.gather(s.X, 3);
    const auto sub = sub_prism_volumes(X, Vec3(0.4, -0.7, 0.2), default_plan());
    CHECK(std::abs(sub[0] + sub[1] + sub[2] - prism_volume(X, default_plan())) <= 1e-12 * prism_volume(X, default_plan()));
  }
}
