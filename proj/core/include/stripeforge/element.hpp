#pragma once

#include "stripeforge/material.hpp"
#include "stripeforge/prism.hpp"

namespace stripeforge::fem {

enum class EvalMode { kEnergy, kGradient, kHessian };

/// Element energy with gradient/Hessian over the stacked nodal unknowns:
/// 18 entries (x_0..x_5) for uncut prisms, 36 (x_0..x_5, xhat_0..xhat_5) for
/// cut ones.
struct ElementResult {
  double energy = 0.0;
  VecX gradient;
  MatX hessian;
};

ElementResult uncut_element(const Mat63& X, const Mat63& x, const Material& mat, const QuadraturePlan& plan,
                            EvalMode mode);

/// Enriched element x(q) = sum N_a x_a + psi sum N_a xhat_a with the parent
/// split into three sub-prisms; each sub-prism takes the stiff material when
/// the interpolated level set is positive there.
ElementResult cut_element(const Mat63& X, const Mat63& x, const Mat63& xhat, const Vec3& phi, const Material& soft,
                          const Material& stiff, const QuadraturePlan& plan, EvalMode mode);

/// Derivatives of the cut-element energy and gradient wrt the three
/// mid-surface level-set values, including the motion of the interface.
struct PhiDerivatives {
  Vec3 energy = Vec3::Zero();
  Eigen::Matrix<double, 36, 3> gradient = Eigen::Matrix<double, 36, 3>::Zero();
};

PhiDerivatives cut_element_phi_derivatives(const Mat63& X, const Mat63& x, const Mat63& xhat, const Vec3& phi,
                                           const Material& soft, const Material& stiff,
                                           const QuadraturePlan& plan);

/// Rest volume by quadrature; throws SolverError if det(dX/dq) <= 0 anywhere.
double prism_volume(const Mat63& X, const QuadraturePlan& plan);

/// Rest volumes of the three sub-prisms of a cut element.
std::array<double, 3> sub_prism_volumes(const Mat63& X, const Vec3& phi, const QuadraturePlan& plan);

}  // namespace stripeforge::fem
