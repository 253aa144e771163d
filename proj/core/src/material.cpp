#include "stripeforge/material.hpp"

namespace stripeforge::fem {

Material from_young_poisson(double E, double nu) {
  if (!(E > 0.0) || !(nu > -1.0 && nu < 0.5)) throw ValidationError("invalid Young's modulus or Poisson ratio");
  Material m;
  m.mu = E / (2.0 * (1.0 + nu));
  m.lambda = E * nu / ((1.0 + nu) * (1.0 - 2.0 * nu));
  return m;
}

Density material_density(const Mat3& C, const Material& m) {
  const double detC = C.determinant();
  if (!(detC > 0.0)) throw SolverError("element inversion");
  const double lnJ = 0.5 * std::log(detC);
  Density d;
  d.psi = 0.5 * (m.mu * (C.trace() - 3.0) - 2.0 * m.mu * lnJ + m.lambda * lnJ * lnJ) +
          0.5 * m.beta_f * m.n_f.dot(C * m.n_f);
  d.dpsi_dC = 0.5 * m.mu * Mat3::Identity() + 0.5 * (m.lambda * lnJ - m.mu) * C.inverse() +
              0.5 * m.beta_f * m.n_f * m.n_f.transpose();
  return d;
}

Mat9 stress_tangent(const Mat3& F, const Material& m) {
  const double J = F.determinant();
  if (!(J > 0.0)) throw SolverError("element inversion");
  const Mat3 Fi = F.inverse();
  const double c = m.lambda * std::log(J) - m.mu;
  Mat9 A = Mat9::Zero();
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      for (int k = 0; k < 3; ++k) {
        for (int l = 0; l < 3; ++l) {
          double v = m.lambda * Fi(j, i) * Fi(l, k) - c * Fi(l, i) * Fi(j, k);
          if (i == k) v += m.beta_f * m.n_f[l] * m.n_f[j];
          if (i == k && j == l) v += m.mu;
          A(3 * i + j, 3 * k + l) = v;
        }
      }
    }
  }
  return A;
}

}  // namespace stripeforge::fem
