#pragma once

#include "stripeforge/types.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace stripeforge::mesh {

/// Undirected edge with i < j and up to two incident triangles (-1 if absent).
struct Edge {
  int i = -1;
  int j = -1;
  std::array<int, 2> tris{-1, -1};

  bool boundary() const { return tris[1] < 0; }
};

/// Immutable triangle surface with edge and adjacency tables.
///
/// Construction validates indices and rejects triangles whose area is at or
/// below `kMinTriangleArea`.
class TriMesh {
 public:
  static constexpr double kMinTriangleArea = 1e-12;

  TriMesh(MatX3 vertices, MatX3i triangles);

  int num_vertices() const { return static_cast<int>(vertices_.rows()); }
  int num_triangles() const { return static_cast<int>(triangles_.rows()); }
  int num_edges() const { return static_cast<int>(edges_.size()); }

  const MatX3& vertices() const { return vertices_; }
  const MatX3i& triangles() const { return triangles_; }
  const std::vector<Edge>& edges() const { return edges_; }
  Vec3 vertex(int v) const { return vertices_.row(v).transpose(); }

  /// Edge ids of triangle t, ordered as (v0v1, v1v2, v2v0).
  const std::array<int, 3>& triangle_edges(int t) const { return tri_edges_[t]; }
  /// Incident edge ids per vertex, in edge-table order.
  const std::vector<int>& vertex_edges(int v) const { return vertex_edges_[v]; }
  const std::vector<int>& vertex_triangles(int v) const { return vertex_tris_[v]; }
  bool is_boundary_vertex(int v) const { return boundary_[v] != 0; }

  double triangle_area(int t) const;
  Vec3 triangle_normal(int t) const;  // unit
  double total_area() const;
  /// Edge id for the unordered pair (a, b), or -1.
  int find_edge(int a, int b) const;
  double mean_edge_length() const;

 private:
  MatX3 vertices_;
  MatX3i triangles_;
  std::vector<Edge> edges_;
  std::vector<std::array<int, 3>> tri_edges_;
  std::vector<std::vector<int>> vertex_edges_;
  std::vector<std::vector<int>> vertex_tris_;
  std::vector<char> boundary_;
};

TriMesh load_obj(const std::filesystem::path& path);
TriMesh parse_obj(const std::string& text);

/// Writes vertices/faces; `u_coord` (optional, per vertex) becomes `vt u 0`.
void write_obj(const std::filesystem::path& path, const MatX3& vertices, const MatX3i& triangles,
               const VecX* u_coord = nullptr);

/// Area-weighted vertex normals. Throws ValidationError naming the vertex if
/// the accumulated normal vanishes.
MatX3 vertex_normals(const TriMesh& mesh);

/// w_ij = 1/2 sum of cotangents of the angles opposite edge ij, clamped at 0.
VecX cotan_edge_weights(const TriMesh& mesh);

/// Per-vertex lumped area: one third of the incident triangle areas.
VecX lumped_vertex_areas(const TriMesh& mesh);

/// Orthonormal tangent frame per vertex (t1, t2) with t1 x t2 = n.
struct TangentFrames {
  MatX3 t1;
  MatX3 t2;
  MatX3 normal;
};

/// Frames built from the world x-axis projected into each tangent plane;
/// falls back to y, then to the first incident edge when the projection
/// degenerates.
TangentFrames tangent_frames(const TriMesh& mesh);

/// Regular nx-by-ny grid on [0,lx]x[0,ly] in the z=0 plane. Each cell is split
/// along the diagonal from (i,j) to (i+1,j+1). Vertex (i,j) has id j*(nx+1)+i.
TriMesh make_grid(int nx, int ny, double lx = 1.0, double ly = 1.0);

/// Open cylinder strip of the given radius around the y axis spanning
/// `angle` radians, with `na` segments around and `ny` along the axis.
TriMesh make_cylinder(double radius, double angle, double length, int na, int ny);

}  // namespace stripeforge::mesh
