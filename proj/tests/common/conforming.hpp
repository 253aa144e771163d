#pragma once

// Interface-conforming meshes built from the same piecewise-linear interface
// that the enriched elements see: every cut triangle is replaced by its three
// sub-triangles, each assigned its side's material.

#include <stripeforge/homogenization.hpp>
#include <stripeforge/prism.hpp>
#include <stripeforge/shell_model.hpp>

#include <cmath>
#include <map>
#include <tuple>
#include <vector>

namespace testutil {

struct ConformingCell {
  stripeforge::mesh::TriMesh mesh;
  std::vector<int> sign;  // per triangle, +1 stiff
};

inline ConformingCell conforming_from_cut(const stripeforge::mesh::TriMesh& grid, const stripeforge::VecX& phi) {
  using namespace stripeforge;
  std::vector<Vec3> verts;
  std::map<std::tuple<long long, long long, long long>, int> ids;
  auto vid = [&](const Vec3& x) {
    const auto key = std::make_tuple(std::llround(x.x() * 1e10), std::llround(x.y() * 1e10), std::llround(x.z() * 1e10));
    auto it = ids.find(key);
    if (it != ids.end()) return it->second;
    const int id = static_cast<int>(verts.size());
    verts.push_back(x);
    ids.emplace(key, id);
    return id;
  };
  for (int v = 0; v < grid.num_vertices(); ++v) vid(grid.vertex(v));

  std::vector<std::array<int, 3>> tris;
  std::vector<int> sign;
  const MatX3i& T = grid.triangles();
  for (int t = 0; t < grid.num_triangles(); ++t) {
    const Vec3 ph = fem::sanitize_level_set(Vec3(phi[T(t, 0)], phi[T(t, 1)], phi[T(t, 2)]));
    const fem::CutGeometry g = fem::cut_subdivide(ph);
    if (!g.cut) {
      tris.push_back({T(t, 0), T(t, 1), T(t, 2)});
      sign.push_back(ph[0] > 0 ? 1 : -1);
      continue;
    }
    const Vec3 x0 = grid.vertex(T(t, 0)), x1 = grid.vertex(T(t, 1)), x2 = grid.vertex(T(t, 2));
    for (int s = 0; s < 3; ++s) {
      std::array<int, 3> tri{};
      for (int k = 0; k < 3; ++k) {
        const Vec2 uv = g.tris[s][k];
        tri[k] = vid((1 - uv.x() - uv.y()) * x0 + uv.x() * x1 + uv.y() * x2);
      }
      tris.push_back(tri);
      sign.push_back(g.side[s]);
    }
  }
  MatX3 V(static_cast<Index>(verts.size()), 3);
  for (size_t i = 0; i < verts.size(); ++i) V.row(static_cast<Index>(i)) = verts[i].transpose();
  MatX3i F(static_cast<Index>(tris.size()), 3);
  for (size_t i = 0; i < tris.size(); ++i) F.row(static_cast<Index>(i)) << tris[i][0], tris[i][1], tris[i][2];
  return {mesh::TriMesh(V, F), sign};
}

// Stiff disk of radius r centred in the unit cell.
inline stripeforge::VecX disk_level_set(const stripeforge::mesh::TriMesh& m, double r) {
  stripeforge::VecX phi(m.num_vertices());
  for (int i = 0; i < m.num_vertices(); ++i) {
    const stripeforge::Vec3 x = m.vertex(i);
    phi[i] = r - std::hypot(x.x() - 0.5, x.y() - 0.5);
  }
  return phi;
}

}  // namespace testutil
