#pragma once

#include "stripeforge/element.hpp"
#include "stripeforge/mesh.hpp"

#include <array>
#include <vector>

namespace stripeforge::fem {

enum class ElementKind : int { kSoft = 0, kStiff = 1, kCut = 2 };

/// Prism shell extruded from a mid-surface. Node i (< n) sits on the bottom
/// face below mid vertex i, node n + i on the top face.
struct ShellModel {
  int n_mid = 0;
  MatX3i tris;
  MatX3 X;  // rest nodes, 2 n_mid rows
  MatX3 normals;
  double h = 0.0;
  Material soft;
  Material stiff;
  QuadraturePlan plan_uncut = default_plan();
  QuadraturePlan plan_cut = cut_plan();

  VecX phi;  // per mid vertex, sanitized (no exact zeros)
  std::vector<ElementKind> kind;
  std::vector<char> enriched;  // per node

  int num_nodes() const { return 2 * n_mid; }
  int num_elements() const { return static_cast<int>(tris.rows()); }
  std::array<int, 6> element_nodes(int e) const;
  Mat63 gather(const MatX3& x, int e) const;
  Vec3 element_phi(int e) const;
  int num_cut() const;
};

/// Offsets mid vertices by +-h/2 along the normals. Throws ValidationError for
/// h <= 0 and names the element if a rest prism is inverted.
ShellModel extrude_shell(const mesh::TriMesh& mesh, double h, const MatX3& normals, const Material& soft,
                         const Material& stiff);

/// Classifies elements by level-set sign (phi > 0 is stiff) and flags the
/// nodes of cut elements as enriched.
void set_level_set(ShellModel& model, const VecX& phi);

/// Entire shell made of one material (+1 stiff, -1 soft).
void set_uniform(ShellModel& model, int sign);

/// Assigns whole elements to one material (+1 stiff, -1 soft) without a
/// level set, e.g. on interface-conforming meshes. Clears enrichment.
void set_element_materials(ShellModel& model, const std::vector<int>& sign);

/// Per-element dispatch; returns 18 (uncut) or 36 (cut) sized derivatives.
ElementResult evaluate_element(const ShellModel& model, int e, const MatX3& x, const MatX3& xhat, EvalMode mode);

/// Mid-surface positions (average of bottom and top nodes).
MatX3 mid_surface(const ShellModel& model, const MatX3& x);

/// Writes the sub-prism mid-surface triangles of all cut elements as OBJ.
void write_subdivision_obj(const std::filesystem::path& path, const ShellModel& model);

}  // namespace stripeforge::fem
