#pragma once

#include "stripeforge/error.hpp"
#include "stripeforge/types.hpp"

#include <Eigen/LU>

#include <cmath>

namespace stripeforge::fem {

/// Compressible Neo-Hookean with an optional fiber term 1/2 beta n^T C n.
struct Material {
  double mu = 1.0;
  double lambda = 1.0;
  double beta_f = 0.0;
  Vec3 n_f = Vec3::UnitX();

  double young() const { return mu * (3.0 * lambda + 2.0 * mu) / (lambda + mu); }
  double poisson() const { return lambda / (2.0 * (lambda + mu)); }
};

/// Lame parameters from Young's modulus and Poisson ratio.
Material from_young_poisson(double E, double nu);

struct Density {
  double psi = 0.0;
  Mat3 dpsi_dC = Mat3::Zero();
};

/// Psi(C) and dPsi/dC. Throws SolverError("element inversion") if det C <= 0.
Density material_density(const Mat3& C, const Material& mat);

using Mat9 = Eigen::Matrix<double, 9, 9>;

/// dP/dF with P row-major vectorized: index 3*i + j for P_ij / F_ij.
Mat9 stress_tangent(const Mat3& F, const Material& mat);

// Energy density and first Piola-Kirchhoff stress as functions of F; templated
// so the cut-element kernels can be differentiated with forward AD.
template <class S>
S energy_density(const Eigen::Matrix<S, 3, 3>& F, const Material& m) {
  using std::log;
  const S J = F.determinant();
  if (!(J > 0.0)) throw SolverError("element inversion");
  const S lnJ = log(J);
  const Eigen::Matrix<S, 3, 1> Fn = F * m.n_f.cast<S>();
  return 0.5 * m.mu * ((F.transpose() * F).trace() - 3.0) - m.mu * lnJ + 0.5 * m.lambda * lnJ * lnJ +
         0.5 * m.beta_f * Fn.squaredNorm();
}

template <class S>
Eigen::Matrix<S, 3, 3> first_piola(const Eigen::Matrix<S, 3, 3>& F, const Material& m) {
  using std::log;
  const S J = F.determinant();
  if (!(J > 0.0)) throw SolverError("element inversion");
  const Eigen::Matrix<S, 3, 3> Finv_t = F.inverse().transpose();
  const Eigen::Matrix<S, 3, 1> n = m.n_f.cast<S>();
  return m.mu * F + (m.lambda * log(J) - m.mu) * Finv_t + m.beta_f * (F * n) * n.transpose();
}

}  // namespace stripeforge::fem
