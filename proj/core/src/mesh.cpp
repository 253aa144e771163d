#include "stripeforge/mesh.hpp"

#include "stripeforge/error.hpp"

#include <Eigen/Geometry>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <map>
#include <sstream>

namespace stripeforge::mesh {

TriMesh::TriMesh(MatX3 vertices, MatX3i triangles)
    : vertices_(std::move(vertices)), triangles_(std::move(triangles)) {
  const int nv = num_vertices();
  const int nt = num_triangles();
  if (nt == 0) throw ValidationError("mesh has no triangles");

  for (int t = 0; t < nt; ++t) {
    for (int k = 0; k < 3; ++k) {
      const int v = triangles_(t, k);
      if (v < 0 || v >= nv) {
        throw ValidationError("triangle " + std::to_string(t) + " references out-of-range vertex " +
                              std::to_string(v));
      }
    }
    const int a = triangles_(t, 0), b = triangles_(t, 1), c = triangles_(t, 2);
    if (a == b || b == c || a == c) {
      throw ValidationError("triangle " + std::to_string(t) + " repeats a vertex");
    }
    if (!(triangle_area(t) > kMinTriangleArea)) {
      throw ValidationError("degenerate triangle " + std::to_string(t) + " (area <= 1e-12)");
    }
  }

  std::map<std::pair<int, int>, int> lookup;
  tri_edges_.resize(nt);
  vertex_tris_.assign(nv, {});
  for (int t = 0; t < nt; ++t) {
    for (int k = 0; k < 3; ++k) {
      const int a = triangles_(t, k);
      const int b = triangles_(t, (k + 1) % 3);
      const auto key = std::minmax(a, b);
      auto [it, inserted] = lookup.try_emplace({key.first, key.second}, static_cast<int>(edges_.size()));
      if (inserted) {
        edges_.push_back(Edge{key.first, key.second, {t, -1}});
      } else {
        Edge& e = edges_[it->second];
        if (e.tris[1] >= 0) {
          throw ValidationError("non-manifold edge (" + std::to_string(key.first) + ", " +
                                std::to_string(key.second) + ")");
        }
        e.tris[1] = t;
      }
      tri_edges_[t][k] = it->second;
      vertex_tris_[a].push_back(t);
    }
  }

  vertex_edges_.assign(nv, {});
  boundary_.assign(nv, 0);
  for (int e = 0; e < num_edges(); ++e) {
    vertex_edges_[edges_[e].i].push_back(e);
    vertex_edges_[edges_[e].j].push_back(e);
    if (edges_[e].boundary()) {
      boundary_[edges_[e].i] = 1;
      boundary_[edges_[e].j] = 1;
    }
  }
}

double TriMesh::triangle_area(int t) const {
  const Vec3 a = vertex(triangles_(t, 0));
  const Vec3 b = vertex(triangles_(t, 1));
  const Vec3 c = vertex(triangles_(t, 2));
  return 0.5 * (b - a).cross(c - a).norm();
}

Vec3 TriMesh::triangle_normal(int t) const {
  const Vec3 a = vertex(triangles_(t, 0));
  const Vec3 b = vertex(triangles_(t, 1));
  const Vec3 c = vertex(triangles_(t, 2));
  return (b - a).cross(c - a).normalized();
}

double TriMesh::total_area() const {
  double area = 0.0;
  for (int t = 0; t < num_triangles(); ++t) area += triangle_area(t);
  return area;
}

int TriMesh::find_edge(int a, int b) const {
  for (int e : vertex_edges_[a]) {
    if (edges_[e].i == b || edges_[e].j == b) return e;
  }
  return -1;
}

double TriMesh::mean_edge_length() const {
  double sum = 0.0;
  for (const Edge& e : edges_) sum += (vertex(e.j) - vertex(e.i)).norm();
  return sum / static_cast<double>(edges_.size());
}

namespace {

int parse_face_index(const std::string& token, int nv, int line_no) {
  const std::string head = token.substr(0, token.find('/'));
  int idx = 0;
  try {
    idx = std::stoi(head);
  } catch (const std::exception&) {
    throw ValidationError("line " + std::to_string(line_no) + ": bad face index '" + token + "'");
  }
  if (idx < 0) idx = nv + idx + 1;
  if (idx < 1 || idx > nv) {
    throw ValidationError("line " + std::to_string(line_no) + ": out-of-range index " + head);
  }
  return idx - 1;
}

}  // namespace

TriMesh parse_obj(const std::string& text) {
  std::vector<Vec3> verts;
  std::vector<std::array<int, 3>> faces;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::istringstream ls(line);
    std::string tag;
    if (!(ls >> tag)) continue;
    if (tag == "v") {
      Vec3 p;
      if (!(ls >> p.x() >> p.y() >> p.z())) {
        throw ValidationError("line " + std::to_string(line_no) + ": malformed vertex");
      }
      verts.push_back(p);
    } else if (tag == "f") {
      std::vector<std::string> tokens;
      std::string tok;
      while (ls >> tok) tokens.push_back(tok);
      if (tokens.size() != 3) {
        throw ValidationError("line " + std::to_string(line_no) + ": non-triangle face");
      }
      const int nv = static_cast<int>(verts.size());
      faces.push_back({parse_face_index(tokens[0], nv, line_no), parse_face_index(tokens[1], nv, line_no),
                       parse_face_index(tokens[2], nv, line_no)});
    }
  }
  MatX3 V(static_cast<Index>(verts.size()), 3);
  for (size_t i = 0; i < verts.size(); ++i) V.row(static_cast<Index>(i)) = verts[i].transpose();
  MatX3i F(static_cast<Index>(faces.size()), 3);
  for (size_t i = 0; i < faces.size(); ++i) {
    F.row(static_cast<Index>(i)) << faces[i][0], faces[i][1], faces[i][2];
  }
  return TriMesh(std::move(V), std::move(F));
}

TriMesh load_obj(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open mesh file " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_obj(buffer.str());
}

void write_obj(const std::filesystem::path& path, const MatX3& vertices, const MatX3i& triangles,
               const VecX* u_coord) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << std::setprecision(17);
  for (Index i = 0; i < vertices.rows(); ++i) {
    out << "v " << vertices(i, 0) << ' ' << vertices(i, 1) << ' ' << vertices(i, 2) << '\n';
  }
  if (u_coord) {
    for (Index i = 0; i < u_coord->size(); ++i) out << "vt " << (*u_coord)[i] << " 0\n";
  }
  for (Index t = 0; t < triangles.rows(); ++t) {
    out << 'f';
    for (int k = 0; k < 3; ++k) {
      const int v = triangles(t, k) + 1;
      out << ' ' << v;
      if (u_coord) out << '/' << v;
    }
    out << '\n';
  }
}

MatX3 vertex_normals(const TriMesh& mesh) {
  MatX3 normals = MatX3::Zero(mesh.num_vertices(), 3);
  VecX magnitude = VecX::Zero(mesh.num_vertices());
  const auto& F = mesh.triangles();
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    const Vec3 a = mesh.vertex(F(t, 0));
    const Vec3 b = mesh.vertex(F(t, 1));
    const Vec3 c = mesh.vertex(F(t, 2));
    // cross product norm is twice the area: area-weighted sum
    const Vec3 n = (b - a).cross(c - a);
    for (int k = 0; k < 3; ++k) {
      normals.row(F(t, k)) += n.transpose();
      magnitude[F(t, k)] += n.norm();
    }
  }
  for (int v = 0; v < mesh.num_vertices(); ++v) {
    const double len = normals.row(v).norm();
    if (!(len > 1e-12 * magnitude[v])) {
      throw ValidationError("vertex " + std::to_string(v) + " has a vanishing accumulated normal");
    }
    normals.row(v) /= len;
  }
  return normals;
}

VecX cotan_edge_weights(const TriMesh& mesh) {
  VecX w = VecX::Zero(mesh.num_edges());
  const auto& F = mesh.triangles();
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    for (int k = 0; k < 3; ++k) {
      // edge (v0v1, v1v2, v2v0)[k] is opposite to corner (k+2)%3
      const Vec3 o = mesh.vertex(F(t, (k + 2) % 3));
      const Vec3 a = mesh.vertex(F(t, k)) - o;
      const Vec3 b = mesh.vertex(F(t, (k + 1) % 3)) - o;
      const double cot = a.dot(b) / a.cross(b).norm();
      w[mesh.triangle_edges(t)[k]] += 0.5 * cot;
    }
  }
  return w.cwiseMax(0.0);
}

VecX lumped_vertex_areas(const TriMesh& mesh) {
  VecX m = VecX::Zero(mesh.num_vertices());
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    const double a = mesh.triangle_area(t) / 3.0;
    for (int k = 0; k < 3; ++k) m[mesh.triangles()(t, k)] += a;
  }
  return m;
}

TangentFrames tangent_frames(const TriMesh& mesh) {
  const MatX3 n = vertex_normals(mesh);
  TangentFrames frames{MatX3(mesh.num_vertices(), 3), MatX3(mesh.num_vertices(), 3), n};
  for (int v = 0; v < mesh.num_vertices(); ++v) {
    const Vec3 nv = n.row(v).transpose();
    Vec3 t1 = Vec3::Zero();
    for (const Vec3& ref : {Vec3(Vec3::UnitX()), Vec3(Vec3::UnitY())}) {
      const Vec3 proj = ref - ref.dot(nv) * nv;
      if (proj.norm() > 0.1) {
        t1 = proj.normalized();
        break;
      }
    }
    if (t1.isZero()) {
      const auto& e = mesh.edges()[mesh.vertex_edges(v).front()];
      const Vec3 d = mesh.vertex(e.i == v ? e.j : e.i) - mesh.vertex(v);
      t1 = (d - d.dot(nv) * nv).normalized();
    }
    frames.t1.row(v) = t1.transpose();
    frames.t2.row(v) = nv.cross(t1).transpose();
  }
  return frames;
}

TriMesh make_grid(int nx, int ny, double lx, double ly) {
  if (nx < 1 || ny < 1) throw ValidationError("grid resolution must be positive");
  MatX3 V((nx + 1) * (ny + 1), 3);
  for (int j = 0; j <= ny; ++j) {
    for (int i = 0; i <= nx; ++i) {
      V.row(j * (nx + 1) + i) << lx * i / nx, ly * j / ny, 0.0;
    }
  }
  MatX3i F(2 * nx * ny, 3);
  int t = 0;
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      const int v00 = j * (nx + 1) + i;
      const int v10 = v00 + 1;
      const int v01 = v00 + nx + 1;
      const int v11 = v01 + 1;
      F.row(t++) << v00, v10, v11;
      F.row(t++) << v00, v11, v01;
    }
  }
  return TriMesh(std::move(V), std::move(F));
}

TriMesh make_cylinder(double radius, double angle, double length, int na, int ny) {
  if (na < 1 || ny < 1) throw ValidationError("cylinder resolution must be positive");
  MatX3 V((na + 1) * (ny + 1), 3);
  for (int j = 0; j <= ny; ++j) {
    for (int i = 0; i <= na; ++i) {
      const double a = angle * i / na;
      // outward normal is (sin a, 0, cos a)
      V.row(j * (na + 1) + i) << radius * std::sin(a), length * j / ny, radius * std::cos(a);
    }
  }
  MatX3i F(2 * na * ny, 3);
  int t = 0;
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < na; ++i) {
      const int v00 = j * (na + 1) + i;
      const int v10 = v00 + 1;
      const int v01 = v00 + na + 1;
      const int v11 = v01 + 1;
      F.row(t++) << v00, v10, v11;
      F.row(t++) << v00, v11, v01;
    }
  }
  return TriMesh(std::move(V), std::move(F));
}

}  // namespace stripeforge::mesh
