#include "stripeforge/shell_model.hpp"

#include "stripeforge/error.hpp"

#include <fstream>
#include <iomanip>

namespace stripeforge::fem {

std::array<int, 6> ShellModel::element_nodes(int e) const {
  const int a = tris(e, 0), b = tris(e, 1), c = tris(e, 2);
  return {a, b, c, n_mid + a, n_mid + b, n_mid + c};
}

Mat63 ShellModel::gather(const MatX3& x, int e) const {
  Mat63 out;
  const auto nodes = element_nodes(e);
  for (int k = 0; k < 6; ++k) out.row(k) = x.row(nodes[k]);
  return out;
}

Vec3 ShellModel::element_phi(int e) const { return Vec3(phi[tris(e, 0)], phi[tris(e, 1)], phi[tris(e, 2)]); }

int ShellModel::num_cut() const {
  int c = 0;
  for (ElementKind k : kind) c += k == ElementKind::kCut;
  return c;
}

ShellModel extrude_shell(const mesh::TriMesh& mesh, double h, const MatX3& normals, const Material& soft,
                         const Material& stiff) {
  if (!(h > 0.0)) throw ValidationError("thickness h must be positive");
  if (normals.rows() != mesh.num_vertices()) throw ValidationError("one normal per vertex required");
  ShellModel m;
  m.n_mid = mesh.num_vertices();
  m.tris = mesh.triangles();
  m.normals = normals;
  m.h = h;
  m.soft = soft;
  m.stiff = stiff;
  m.X.resize(2 * m.n_mid, 3);
  for (int i = 0; i < m.n_mid; ++i) {
    const Vec3 x = mesh.vertex(i);
    const Vec3 n = normals.row(i).transpose();
    m.X.row(i) = (x - 0.5 * h * n).transpose();
    m.X.row(m.n_mid + i) = (x + 0.5 * h * n).transpose();
  }
  for (int e = 0; e < m.num_elements(); ++e) {
    try {
      prism_volume(m.gather(m.X, e), m.plan_uncut);
    } catch (const SolverError&) {
      throw ValidationError("inverted prism at element " + std::to_string(e));
    }
  }
  set_uniform(m, 1);
  return m;
}

void set_level_set(ShellModel& m, const VecX& phi) {
  if (phi.size() != m.n_mid) throw ValidationError("level set needs one value per mid vertex");
  m.phi = phi;
  for (Index i = 0; i < m.phi.size(); ++i) {
    if (m.phi[i] == 0.0) m.phi[i] = 1e-9;
  }
  m.kind.assign(m.num_elements(), ElementKind::kStiff);
  m.enriched.assign(m.num_nodes(), 0);
  for (int e = 0; e < m.num_elements(); ++e) {
    const Vec3 p = m.element_phi(e);
    const int npos = (p[0] > 0) + (p[1] > 0) + (p[2] > 0);
    if (npos == 3) {
      m.kind[e] = ElementKind::kStiff;
    } else if (npos == 0) {
      m.kind[e] = ElementKind::kSoft;
    } else {
      m.kind[e] = ElementKind::kCut;
      for (int n : m.element_nodes(e)) m.enriched[n] = 1;
    }
  }
}

void set_uniform(ShellModel& m, int sign) { set_level_set(m, VecX::Constant(m.n_mid, sign > 0 ? 1.0 : -1.0)); }

void set_element_materials(ShellModel& m, const std::vector<int>& sign) {
  if (static_cast<int>(sign.size()) != m.num_elements()) throw ValidationError("one material sign per element");
  m.phi = VecX::Zero(m.n_mid);
  m.kind.assign(sign.size(), ElementKind::kSoft);
  for (size_t e = 0; e < sign.size(); ++e) m.kind[e] = sign[e] > 0 ? ElementKind::kStiff : ElementKind::kSoft;
  m.enriched.assign(m.num_nodes(), 0);
}

ElementResult evaluate_element(const ShellModel& m, int e, const MatX3& x, const MatX3& xhat, EvalMode mode) {
  const Mat63 Xe = m.gather(m.X, e), xe = m.gather(x, e);
  switch (m.kind[e]) {
    case ElementKind::kSoft:
      return uncut_element(Xe, xe, m.soft, m.plan_uncut, mode);
    case ElementKind::kStiff:
      return uncut_element(Xe, xe, m.stiff, m.plan_uncut, mode);
    case ElementKind::kCut:
      break;
  }
  return cut_element(Xe, xe, m.gather(xhat, e), m.element_phi(e), m.soft, m.stiff, m.plan_cut, mode);
}

MatX3 mid_surface(const ShellModel& m, const MatX3& x) {
  return 0.5 * (x.topRows(m.n_mid) + x.bottomRows(m.n_mid));
}

void write_subdivision_obj(const std::filesystem::path& path, const ShellModel& m) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << std::setprecision(17);
  const MatX3 mid = 0.5 * (m.X.topRows(m.n_mid) + m.X.bottomRows(m.n_mid));
  int base = 1;
  for (int e = 0; e < m.num_elements(); ++e) {
    if (m.kind[e] != ElementKind::kCut) continue;
    const CutGeometry g = cut_subdivide(m.element_phi(e));
    const Vec3 P[3] = {mid.row(m.tris(e, 0)).transpose(), mid.row(m.tris(e, 1)).transpose(),
                       mid.row(m.tris(e, 2)).transpose()};
    for (const auto& tri : g.tris) {
      for (const Vec2& uv : tri) {
        const Vec3 p = (1.0 - uv.x() - uv.y()) * P[0] + uv.x() * P[1] + uv.y() * P[2];
        out << "v " << p.x() << ' ' << p.y() << ' ' << p.z() << '\n';
      }
      out << "f " << base << ' ' << base + 1 << ' ' << base + 2 << '\n';
      base += 3;
    }
  }
}

}  // namespace stripeforge::fem
