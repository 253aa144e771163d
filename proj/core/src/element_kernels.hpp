#pragma once

// Quadrature-point construction shared by the analytic kernels (double) and
// the level-set derivatives (forward AD).

#include "stripeforge/element.hpp"
#include "stripeforge/error.hpp"

#include <Eigen/LU>
#include <unsupported/Eigen/AutoDiff>

#include <vector>

namespace stripeforge::fem::detail {

inline double value_of(double x) { return x; }
template <class D>
double value_of(const Eigen::AutoDiffScalar<D>& x) {
  return x.value();
}

template <class S>
struct QPoint {
  S weight;                              // plan weight * det(dX/dq)
  Eigen::Matrix<S, 3, Eigen::Dynamic> G;  // material gradients of the basis, one column per unknown node
  int material = 0;                      // 0 soft, 1 stiff
  int sub = -1;                          // sub-prism id for cut elements
};

template <class S>
using Mat3S = Eigen::Matrix<S, 3, 3>;

// Rest Jacobian dX/dq and its inverse transpose at q; throws on inversion.
template <class S>
bool rest_jacobian(const Mat63& X, const Eigen::Matrix<S, 6, 3>& dN, S& det, Mat3S<S>& Jinv_t) {
  const Mat3S<S> J = X.cast<S>().transpose() * dN;
  det = J.determinant();
  if (!(det > 0.0)) return false;
  Jinv_t = J.inverse().transpose();
  return true;
}

template <class S>
std::vector<QPoint<S>> uncut_points(const Mat63& X, const QuadraturePlan& plan, int material) {
  std::vector<QPoint<S>> pts;
  pts.reserve(plan.size());
  Eigen::Matrix<S, 6, 1> N;
  Eigen::Matrix<S, 6, 3> dN;
  for (size_t i = 0; i < plan.inplane.size(); ++i) {
    for (size_t k = 0; k < plan.thick.size(); ++k) {
      prism_basis<S>(S(plan.inplane[i].x()), S(plan.inplane[i].y()), S(plan.thick[k]), N, dN);
      S det;
      Mat3S<S> Jit;
      if (!rest_jacobian<S>(X, dN, det, Jit)) throw SolverError("inverted rest prism");
      QPoint<S> qp;
      qp.weight = plan.inplane_w[i] * plan.thick_w[k] * det;
      qp.G = Jit * dN.transpose();
      qp.material = material;
      pts.push_back(std::move(qp));
    }
  }
  return pts;
}

template <class S>
std::vector<QPoint<S>> cut_points(const Mat63& X, const Eigen::Matrix<S, 3, 1>& phi_in, const QuadraturePlan& plan) {
  using Vec2S = Eigen::Matrix<S, 2, 1>;
  Eigen::Matrix<S, 3, 1> phi = phi_in;
  Vec3 val;
  for (int i = 0; i < 3; ++i) {
    val[i] = value_of(phi[i]);
    if (val[i] == 0.0) {
      phi[i] = S(1e-9);
      val[i] = 1e-9;
    }
  }
  const CutGeometry geo = cut_subdivide(val);
  if (!geo.cut) throw ValidationError("cut_points called on an uncut element");
  const int c = geo.lone, a = (c + 1) % 3, b = (c + 2) % 3;
  const S s1 = phi[c] / (phi[c] - phi[a]);
  const S s2 = phi[c] / (phi[c] - phi[b]);
  const Vec2S Rc = reference_vertex(c).cast<S>(), Ra = reference_vertex(a).cast<S>(),
              Rb = reference_vertex(b).cast<S>();
  const Vec2S P1 = (1.0 - s1) * Rc + s1 * Ra;
  const Vec2S P2 = (1.0 - s2) * Rc + s2 * Rb;
  const std::array<std::array<Vec2S, 3>, 3> tris = {{{Rc, P1, P2}, {Ra, Rb, P2}, {Ra, P2, P1}}};

  // psi = sum_i L_i (|phi_i| - sgn phi_i), sgn fixed per sub-prism
  Vec3 absign;
  for (int i = 0; i < 3; ++i) absign[i] = val[i] > 0 ? 1.0 : -1.0;
  const double dL[3][2] = {{-1.0, -1.0}, {1.0, 0.0}, {0.0, 1.0}};

  std::vector<QPoint<S>> pts;
  pts.reserve(3 * plan.size());
  Eigen::Matrix<S, 6, 1> N;
  Eigen::Matrix<S, 6, 3> dN;
  for (int k = 0; k < 3; ++k) {
    const Vec2S& T0 = tris[k][0];
    const Vec2S e1 = tris[k][1] - T0, e2 = tris[k][2] - T0;
    const S jac2 = e1.x() * e2.y() - e1.y() * e2.x();  // 2 * sub-area / (2 * 1/2)
    const double sgn = geo.side[k];
    Eigen::Matrix<S, 3, 1> coef;
    for (int i = 0; i < 3; ++i) coef[i] = absign[i] * phi[i] - sgn * phi[i];
    Eigen::Matrix<S, 3, 1> dpsi;
    dpsi << dL[0][0] * coef[0] + dL[1][0] * coef[1] + dL[2][0] * coef[2],
        dL[0][1] * coef[0] + dL[1][1] * coef[1] + dL[2][1] * coef[2], S(0.0);
    for (size_t i = 0; i < plan.inplane.size(); ++i) {
      const Vec2S uv = T0 + plan.inplane[i].x() * e1 + plan.inplane[i].y() * e2;
      for (size_t m = 0; m < plan.thick.size(); ++m) {
        prism_basis<S>(uv.x(), uv.y(), S(plan.thick[m]), N, dN);
        S det;
        Mat3S<S> Jit;
        if (!rest_jacobian<S>(X, dN, det, Jit)) throw SolverError("inverted rest prism");
        const S L0 = 1.0 - uv.x() - uv.y();
        const S psi = L0 * coef[0] + uv.x() * coef[1] + uv.y() * coef[2];
        QPoint<S> qp;
        qp.weight = plan.inplane_w[i] * plan.thick_w[m] * jac2 * det;
        qp.G.resize(3, 12);
        qp.G.leftCols(6) = Jit * dN.transpose();
        for (int n = 0; n < 6; ++n) qp.G.col(6 + n) = Jit * (psi * dN.row(n).transpose() + N[n] * dpsi);
        qp.material = geo.side[k] > 0 ? 1 : 0;
        qp.sub = k;
        pts.push_back(std::move(qp));
      }
    }
  }
  return pts;
}

// Energy and gradient; `x` stacks one row per basis column of G.
template <class S>
void energy_gradient(const std::vector<QPoint<S>>& pts, const Eigen::Matrix<double, Eigen::Dynamic, 3>& x,
                     const Material* mats, S& U, Eigen::Matrix<S, Eigen::Dynamic, 1>* g) {
  const int ng = static_cast<int>(x.rows());
  U = S(0.0);
  if (g) g->setZero(3 * ng);
  const Eigen::Matrix<S, Eigen::Dynamic, 3> xs = x.cast<S>();
  for (const QPoint<S>& qp : pts) {
    const Mat3S<S> F = xs.transpose() * qp.G.transpose();
    const Material& mat = mats[qp.material];
    U += qp.weight * energy_density<S>(F, mat);
    if (g) {
      const Mat3S<S> P = first_piola<S>(F, mat);
      const Eigen::Matrix<S, 3, Eigen::Dynamic> PG = P * qp.G;
      for (int a = 0; a < ng; ++a) g->template segment<3>(3 * a) += qp.weight * PG.col(a);
    }
  }
}

}  // namespace stripeforge::fem::detail
