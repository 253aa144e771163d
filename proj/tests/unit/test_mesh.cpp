#include <doctest.h>

#include <stripeforge/error.hpp>
#include <stripeforge/mesh.hpp>

#include <Eigen/Geometry>

#include "oracle_values.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>

using namespace stripeforge;
using namespace stripeforge::mesh;

namespace {

TriMesh hexagon() {
  MatX3 V(7, 3);
  V.row(0) << 0, 0, 0;
  for (int k = 0; k < 6; ++k) V.row(k + 1) << std::cos(k * kPi / 3), std::sin(k * kPi / 3), 0;
  MatX3i F(6, 3);
  for (int k = 0; k < 6; ++k) F.row(k) << 0, k + 1, (k + 1) % 6 + 1;
  return TriMesh(V, F);
}

}  // namespace

TEST_SUITE("mesh") {
  TEST_CASE("two-triangle square from OBJ text") {
    const TriMesh m = parse_obj("v 0 0 0\nv 1 0 0\nv 1 1 0\nv 0 1 0\nf 1 2 3\nf 1 3 4\n");
    CHECK(m.num_vertices() == 4);
    CHECK(m.num_edges() == 5);
    CHECK(m.num_triangles() == 2);
  }

  TEST_CASE("quad face is rejected") {
    CHECK_THROWS_WITH_AS(parse_obj("v 0 0 0\nv 1 0 0\nv 1 1 0\nv 0 1 0\nf 1 2 3 4\n"),
                         doctest::Contains("non-triangle face"), ValidationError);
  }

  TEST_CASE("degenerate and out-of-range triangles are rejected") {
    CHECK_THROWS_AS(parse_obj("v 0 0 0\nv 1 0 0\nv 2 0 0\nf 1 2 3\n"), ValidationError);
    CHECK_THROWS_AS(parse_obj("v 0 0 0\nv 1 0 0\nv 0 1 0\nf 1 2 4\n"), ValidationError);
  }

  TEST_CASE("10x10 grid counts survive an OBJ round trip") {
    const TriMesh g = make_grid(10, 10);
    const auto path = std::filesystem::temp_directory_path() / "sf_grid10.obj";
    write_obj(path, g.vertices(), g.triangles());
    const TriMesh m = load_obj(path);
    CHECK(m.num_vertices() == 121);
    CHECK(m.num_triangles() == 200);
    CHECK(m.num_edges() == 320);
    CHECK((m.vertices() - g.vertices()).cwiseAbs().maxCoeff() == 0.0);
    std::filesystem::remove(path);
  }

  TEST_CASE("missing file raises an I/O error") {
    CHECK_THROWS_AS(load_obj("/nonexistent/mesh.obj"), IoError);
  }

  TEST_CASE("flat grid normals point along +z") {
    const MatX3 n = vertex_normals(make_grid(4, 3, 2.0, 1.0));
    for (int v = 0; v < n.rows(); ++v) CHECK((n.row(v) - Eigen::RowVector3d(0, 0, 1)).norm() <= 1e-12);
  }

  TEST_CASE("cylinder normals are radial") {
    // one-sided boundary fans tilt by half a segment; interior fans are balanced
    const TriMesh c = make_cylinder(1.0, 1.2, 0.5, 48, 4);
    const MatX3 n = vertex_normals(c);
    for (int v = 0; v < c.num_vertices(); ++v) {
      if (c.is_boundary_vertex(v)) continue;
      Vec3 radial = c.vertex(v);
      radial.y() = 0.0;
      CHECK((n.row(v).transpose() - radial.normalized()).norm() <= 1e-6);
    }
  }

  TEST_CASE("single triangle normal equals the face normal") {
    MatX3 V(3, 3);
    V << 0, 0, 0, 1, 0, 0.3, 0, 1, -0.2;
    MatX3i F(1, 3);
    F << 0, 1, 2;
    const TriMesh m(V, F);
    const MatX3 n = vertex_normals(m);
    for (int v = 0; v < 3; ++v) CHECK((n.row(v).transpose() - m.triangle_normal(0)).norm() <= 1e-14);
  }

  TEST_CASE("vanishing accumulated normal names the vertex") {
    // equal-area triangles with opposite normals folded flat about edge 0-1
    MatX3 V(4, 3);
    V << 0, 0, 0, 1, 0, 0, 0, 1, 0, 0, -1, 0;
    MatX3i F(2, 3);
    F << 0, 1, 2, 0, 1, 3;
    const TriMesh m(V, F);
    CHECK_THROWS_WITH_AS(vertex_normals(m), doctest::Contains("vertex 0"), ValidationError);
  }

  TEST_CASE("cotangent weights") {
    const TriMesh h = hexagon();
    const VecX w = cotan_edge_weights(h);
    for (int e = 0; e < h.num_edges(); ++e) {
      const Edge& ed = h.edges()[e];
      if (!ed.boundary()) CHECK(w[e] == doctest::Approx(oracle::kCot60Weight).epsilon(1e-12));
    }
    const TriMesh g = make_grid(1, 1);
    const VecX wg = cotan_edge_weights(g);
    CHECK(std::abs(wg[g.find_edge(0, 3)]) <= 1e-15);

    MatX3 V(3, 3);
    V << 0, 0, 0, 2, 0, 0, 0, 1, 0;
    MatX3i F(1, 3);
    F << 0, 1, 2;
    const TriMesh t(V, F);
    const VecX wt = cotan_edge_weights(t);
    // edge (1,2) is opposite the right angle at 0, edge (0,1) opposite vertex 2
    CHECK(std::abs(wt[t.find_edge(1, 2)]) <= 1e-15);
    CHECK(wt[t.find_edge(0, 1)] == doctest::Approx(0.5 * (1.0 / 2.0)).epsilon(1e-12));
  }

  TEST_CASE("obtuse triangles clamp negative cotangents") {
    MatX3 V(4, 3);
    V << 0, 0, 0, 2, 0, 0, 1, 0.1, 0, 1, -0.1, 0;
    MatX3i F(2, 3);
    F << 0, 1, 2, 0, 3, 1;
    const VecX w = cotan_edge_weights(TriMesh(V, F));
    CHECK(w.minCoeff() >= 0.0);
  }

  TEST_CASE("interior cotan sums are positive on a flat Delaunay mesh") {
    const TriMesh g = make_grid(5, 5);
    const VecX w = cotan_edge_weights(g);
    for (int v = 0; v < g.num_vertices(); ++v) {
      if (g.is_boundary_vertex(v)) continue;
      double s = 0;
      for (int e : g.vertex_edges(v)) s += w[e];
      CHECK(s > 0.0);
    }
  }

  TEST_CASE("tangent frames are orthonormal and right-handed") {
    const TriMesh c = make_cylinder(0.5, 2.0, 1.0, 16, 3);
    const TangentFrames f = tangent_frames(c);
    for (int v = 0; v < c.num_vertices(); ++v) {
      const Vec3 t1 = f.t1.row(v), t2 = f.t2.row(v), n = f.normal.row(v);
      CHECK(std::abs(t1.norm() - 1) < 1e-12);
      CHECK(std::abs(t2.norm() - 1) < 1e-12);
      CHECK(std::abs(t1.dot(n)) < 1e-12);
      CHECK((t1.cross(t2) - n).norm() < 1e-12);
    }
  }

  TEST_CASE("lumped areas sum to the total area") {
    const TriMesh c = make_cylinder(0.5, 2.0, 1.0, 16, 3);
    CHECK(lumped_vertex_areas(c).sum() == doctest::Approx(c.total_area()).epsilon(1e-13));
  }
}
