#pragma once

#include "stripeforge/types.hpp"

#include <array>
#include <vector>

namespace stripeforge::fem {

using Mat63 = Eigen::Matrix<double, 6, 3>;
using Vec6 = Eigen::Matrix<double, 6, 1>;

// Six-node prism on q = (u, v, t), (u, v) barycentric in-plane and t in [-1, 1].
// Nodes 0..2 form the bottom face (t = -1), 3..5 the top face (t = +1), with
// node a + 3 above node a. L = (1 - u - v, u, v).
template <class S>
void prism_basis(const S& u, const S& v, const S& t, Eigen::Matrix<S, 6, 1>& N, Eigen::Matrix<S, 6, 3>& dN) {
  const S L[3] = {1.0 - u - v, u, v};
  const double dL[3][2] = {{-1.0, -1.0}, {1.0, 0.0}, {0.0, 1.0}};
  for (int a = 0; a < 3; ++a) {
    const S lo = 0.5 * (1.0 - t), hi = 0.5 * (1.0 + t);
    N[a] = L[a] * lo;
    N[a + 3] = L[a] * hi;
    dN(a, 0) = dL[a][0] * lo;
    dN(a, 1) = dL[a][1] * lo;
    dN(a, 2) = -0.5 * L[a];
    dN(a + 3, 0) = dL[a][0] * hi;
    dN(a + 3, 1) = dL[a][1] * hi;
    dN(a + 3, 2) = 0.5 * L[a];
  }
}

struct PrismShape {
  Vec6 N;
  Mat63 dN;  // rows: nodes, cols: d/du, d/dv, d/dt
};

PrismShape prism_shape(const Vec3& q);

/// Tensor rule: in-plane points on the reference triangle (weights sum to 1/2)
/// times Gauss points in t (weights sum to 2).
struct QuadraturePlan {
  std::vector<Vec2> inplane;
  std::vector<double> inplane_w;
  std::vector<double> thick;
  std::vector<double> thick_w;

  int size() const { return static_cast<int>(inplane.size() * thick.size()); }
  double weight_sum() const;
};

/// 3 in-plane x 2 thickness points.
QuadraturePlan default_plan();
/// Sub-prism rule for cut elements: 7-point degree-5 in-plane x 2 thickness.
/// The enriched gradient is quadratic in-plane, so the 3-point rule is not
/// enough there.
QuadraturePlan cut_plan();
/// Cut rule on each of the 4 midpoint sub-triangles, 3 thickness points.
QuadraturePlan refined_plan();

/// Subdivision of a triangle crossed by the zero level of a linear field.
/// All points are in reference (u, v) coordinates of the parent.
struct CutGeometry {
  bool cut = false;
  int lone = -1;  // vertex whose sign differs from the other two
  std::array<double, 2> s{0.0, 0.0};  // interface fractions on edges lone->next, lone->next(next)
  std::array<std::array<Vec2, 3>, 3> tris{};
  std::array<int, 3> side{0, 0, 0};  // +1 stiff, -1 soft
  std::array<double, 3> area_fraction{0.0, 0.0, 0.0};
};

/// Exact zeros are replaced by +1e-9 before classification.
Vec3 sanitize_level_set(const Vec3& phi);

/// Splits along the interface into (c,P1,P2), (a,b,P2), (a,P2,P1), where c is
/// the lone-sign vertex, a = next(c), b = next(a).
CutGeometry cut_subdivide(const Vec3& phi);

/// Ridge function psi = sum_i L_i |phi_i| - |sum_i L_i phi_i| at barycentric L.
double ridge_enrichment(const Vec3& L, const Vec3& phi);

/// Reference-coordinate vertex of the parent triangle.
Vec2 reference_vertex(int a);

}  // namespace stripeforge::fem
