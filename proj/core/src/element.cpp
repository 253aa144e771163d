#include "stripeforge/element.hpp"

#include "element_kernels.hpp"

namespace stripeforge::fem {

namespace {

using AD = Eigen::AutoDiffScalar<Vec3>;
using MatG3 = Eigen::Matrix<double, Eigen::Dynamic, 3>;

ElementResult evaluate(const std::vector<detail::QPoint<double>>& pts, const MatG3& x, const Material* mats,
                       EvalMode mode) {
  const int ng = static_cast<int>(x.rows());
  ElementResult r;
  if (mode == EvalMode::kEnergy) {
    detail::energy_gradient<double>(pts, x, mats, r.energy, nullptr);
    return r;
  }
  r.gradient.setZero(3 * ng);
  if (mode == EvalMode::kHessian) r.hessian.setZero(3 * ng, 3 * ng);
  Eigen::Matrix<double, 9, Eigen::Dynamic> Bm(9, 3 * ng);
  for (const auto& qp : pts) {
    const Mat3 F = x.transpose() * qp.G.transpose();
    const Material& mat = mats[qp.material];
    r.energy += qp.weight * energy_density<double>(F, mat);
    const Mat3 P = first_piola<double>(F, mat);
    const Eigen::Matrix<double, 3, Eigen::Dynamic> PG = P * qp.G;
    for (int a = 0; a < ng; ++a) r.gradient.segment<3>(3 * a) += qp.weight * PG.col(a);
    if (mode == EvalMode::kHessian) {
      // dvec(F)/dx_{a,i}: row 3*i + j holds G_a(j)
      Bm.setZero();
      for (int a = 0; a < ng; ++a) {
        for (int i = 0; i < 3; ++i) Bm.block<3, 1>(3 * i, 3 * a + i) = qp.G.col(a);
      }
      const Mat9 A = stress_tangent(F, mat);
      r.hessian.noalias() += qp.weight * (Bm.transpose() * (A * Bm));
    }
  }
  if (mode == EvalMode::kHessian) r.hessian = 0.5 * (r.hessian + r.hessian.transpose());
  return r;
}

MatG3 stack(const Mat63& x, const Mat63& xhat) {
  MatG3 s(12, 3);
  s.topRows(6) = x;
  s.bottomRows(6) = xhat;
  return s;
}

}  // namespace

ElementResult uncut_element(const Mat63& X, const Mat63& x, const Material& mat, const QuadraturePlan& plan,
                            EvalMode mode) {
  const auto pts = detail::uncut_points<double>(X, plan, 0);
  const Material mats[2] = {mat, mat};
  return evaluate(pts, x, mats, mode);
}

ElementResult cut_element(const Mat63& X, const Mat63& x, const Mat63& xhat, const Vec3& phi, const Material& soft,
                          const Material& stiff, const QuadraturePlan& plan, EvalMode mode) {
  const auto pts = detail::cut_points<double>(X, phi, plan);
  const Material mats[2] = {soft, stiff};
  return evaluate(pts, stack(x, xhat), mats, mode);
}

PhiDerivatives cut_element_phi_derivatives(const Mat63& X, const Mat63& x, const Mat63& xhat, const Vec3& phi,
                                           const Material& soft, const Material& stiff,
                                           const QuadraturePlan& plan) {
  Eigen::Matrix<AD, 3, 1> phi_ad;
  for (int i = 0; i < 3; ++i) phi_ad[i] = AD(phi[i], Vec3::Unit(i));
  const auto pts = detail::cut_points<AD>(X, phi_ad, plan);
  const Material mats[2] = {soft, stiff};
  AD U;
  Eigen::Matrix<AD, Eigen::Dynamic, 1> g;
  detail::energy_gradient<AD>(pts, stack(x, xhat), mats, U, &g);
  PhiDerivatives d;
  d.energy = U.derivatives();
  for (int r = 0; r < 36; ++r) d.gradient.row(r) = g[r].derivatives().transpose();
  return d;
}

double prism_volume(const Mat63& X, const QuadraturePlan& plan) {
  double v = 0.0;
  for (const auto& qp : detail::uncut_points<double>(X, plan, 0)) v += qp.weight;
  return v;
}

std::array<double, 3> sub_prism_volumes(const Mat63& X, const Vec3& phi, const QuadraturePlan& plan) {
  std::array<double, 3> v{0.0, 0.0, 0.0};
  for (const auto& qp : detail::cut_points<double>(X, phi, plan)) v[qp.sub] += qp.weight;
  return v;
}

}  // namespace stripeforge::fem
