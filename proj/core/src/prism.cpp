#include "stripeforge/prism.hpp"

#include <cmath>

namespace stripeforge::fem {

PrismShape prism_shape(const Vec3& q) {
  PrismShape s;
  prism_basis<double>(q[0], q[1], q[2], s.N, s.dN);
  return s;
}

double QuadraturePlan::weight_sum() const {
  double a = 0.0, b = 0.0;
  for (double w : inplane_w) a += w;
  for (double w : thick_w) b += w;
  return a * b;
}

QuadraturePlan default_plan() {
  QuadraturePlan p;
  p.inplane = {Vec2(1.0 / 6.0, 1.0 / 6.0), Vec2(2.0 / 3.0, 1.0 / 6.0), Vec2(1.0 / 6.0, 2.0 / 3.0)};
  p.inplane_w = {1.0 / 6.0, 1.0 / 6.0, 1.0 / 6.0};
  const double g = 1.0 / std::sqrt(3.0);
  p.thick = {-g, g};
  p.thick_w = {1.0, 1.0};
  return p;
}

QuadraturePlan cut_plan() {
  QuadraturePlan p;
  // 7-point rule, exact for degree 5
  const double a1 = (6.0 - std::sqrt(15.0)) / 21.0, b1 = 1.0 - 2.0 * a1;
  const double a2 = (6.0 + std::sqrt(15.0)) / 21.0, b2 = 1.0 - 2.0 * a2;
  const double w1 = (155.0 - std::sqrt(15.0)) / 2400.0, w2 = (155.0 + std::sqrt(15.0)) / 2400.0;
  p.inplane = {Vec2(1.0 / 3.0, 1.0 / 3.0), Vec2(a1, a1), Vec2(b1, a1), Vec2(a1, b1),
               Vec2(a2, a2), Vec2(b2, a2), Vec2(a2, b2)};
  p.inplane_w = {9.0 / 80.0, w1, w1, w1, w2, w2, w2};
  const double g = 1.0 / std::sqrt(3.0);
  p.thick = {-g, g};
  p.thick_w = {1.0, 1.0};
  return p;
}

QuadraturePlan refined_plan() {
  const QuadraturePlan base = cut_plan();
  QuadraturePlan p;
  const Vec2 c[4][3] = {{Vec2(0, 0), Vec2(0.5, 0), Vec2(0, 0.5)},
                        {Vec2(0.5, 0), Vec2(1, 0), Vec2(0.5, 0.5)},
                        {Vec2(0, 0.5), Vec2(0.5, 0.5), Vec2(0, 1)},
                        {Vec2(0.5, 0.5), Vec2(0, 0.5), Vec2(0.5, 0)}};
  for (const auto& t : c) {
    for (size_t i = 0; i < base.inplane.size(); ++i) {
      p.inplane.push_back(t[0] + base.inplane[i].x() * (t[1] - t[0]) + base.inplane[i].y() * (t[2] - t[0]));
      p.inplane_w.push_back(base.inplane_w[i] / 4.0);
    }
  }
  const double g = std::sqrt(0.6);
  p.thick = {-g, 0.0, g};
  p.thick_w = {5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0};
  return p;
}

Vec2 reference_vertex(int a) {
  if (a == 1) return Vec2(1.0, 0.0);
  if (a == 2) return Vec2(0.0, 1.0);
  return Vec2(0.0, 0.0);
}

Vec3 sanitize_level_set(const Vec3& phi) {
  Vec3 out = phi;
  for (int i = 0; i < 3; ++i) {
    if (out[i] == 0.0) out[i] = 1e-9;
  }
  return out;
}

namespace {

double signed_area(const Vec2& a, const Vec2& b, const Vec2& c) {
  return 0.5 * ((b - a).x() * (c - a).y() - (b - a).y() * (c - a).x());
}

}  // namespace

CutGeometry cut_subdivide(const Vec3& phi_in) {
  const Vec3 phi = sanitize_level_set(phi_in);
  CutGeometry g;
  const int npos = (phi[0] > 0) + (phi[1] > 0) + (phi[2] > 0);
  if (npos == 0 || npos == 3) return g;
  g.cut = true;
  for (int i = 0; i < 3; ++i) {
    const bool pos = phi[i] > 0;
    if ((npos == 1 && pos) || (npos == 2 && !pos)) g.lone = i;
  }
  const int c = g.lone, a = (c + 1) % 3, b = (c + 2) % 3;
  g.s[0] = phi[c] / (phi[c] - phi[a]);
  g.s[1] = phi[c] / (phi[c] - phi[b]);
  const Vec2 Rc = reference_vertex(c), Ra = reference_vertex(a), Rb = reference_vertex(b);
  const Vec2 P1 = (1.0 - g.s[0]) * Rc + g.s[0] * Ra;
  const Vec2 P2 = (1.0 - g.s[1]) * Rc + g.s[1] * Rb;
  g.tris[0] = {Rc, P1, P2};
  g.tris[1] = {Ra, Rb, P2};
  g.tris[2] = {Ra, P2, P1};
  const int lone_side = phi[c] > 0 ? 1 : -1;
  g.side = {lone_side, -lone_side, -lone_side};
  for (int k = 0; k < 3; ++k) g.area_fraction[k] = signed_area(g.tris[k][0], g.tris[k][1], g.tris[k][2]) / 0.5;
  return g;
}

double ridge_enrichment(const Vec3& L, const Vec3& phi) {
  return L.dot(phi.cwiseAbs()) - std::abs(L.dot(phi));
}

}  // namespace stripeforge::fem
