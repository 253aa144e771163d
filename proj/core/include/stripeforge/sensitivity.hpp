#pragma once

#include "stripeforge/equilibrium.hpp"
#include "stripeforge/stripes.hpp"

#include <Eigen/SparseLU>

#include <memory>

namespace stripeforge::inverse {

/// Linear solves performed while differentiating one design evaluation.
struct SolveCounter {
  int eigen_adjoint = 0;
  int equilibrium_adjoint = 0;
  int equilibrium_states = 0;
  int total() const { return eigen_adjoint + equilibrium_adjoint; }
};

/// Pinned bordered system
///   [A - lambda B, -B v, e_bk; -(B v)^T, 0, 0; e_bk^T, 0, 0]
/// around the reference eigenvector, factorized once.
class EigenSensitivity {
 public:
  EigenSensitivity(const mesh::TriMesh& mesh, const stripes::StripeMatrices& M, const stripes::EigenState& state);

  struct Tangent {
    VecX dv;  // derivative of the current eigenvector v(theta), solver coordinates
    double dlambda = 0.0;
    double dmu = 0.0;
  };
  /// Directional derivative for an edge-angle perturbation domega.
  Tangent tangent(const VecX& domega) const;

  /// dT/domega per edge for g = dT/dv at the current eigenvector.
  VecX adjoint(const VecX& g, SolveCounter* counter = nullptr) const;

  /// Multiplier of the pin constraint recovered from the optimality system.
  double mu() const { return mu_; }
  /// Max-norm residual of the three optimality conditions.
  double optimality_residual() const { return residual_; }
  int dimension() const { return static_cast<int>(K_.rows()); }
  const SparseMat& matrix() const { return K_; }

 private:
  const mesh::TriMesh* mesh_;
  const stripes::StripeMatrices* M_;
  stripes::EigenState state_;
  SparseMat K_;
  std::shared_ptr<Eigen::SparseLU<SparseMat>> lu_;
  double mu_ = 0.0;
  double residual_ = 0.0;
};

/// Bordered matrix without the pin row. Returns the residual of the candidate
/// null vector (J v, 0) relative to |J v|, and whether LU reports failure.
struct UnpinnedCheck {
  bool factorization_failed = false;
  double null_residual = 0.0;
};
UnpinnedCheck check_unpinned_singular(const stripes::StripeMatrices& M, const stripes::EigenState& state);

/// Equilibrium adjoint: solves H w = rhs_y and returns -w^T d(gradient_y)/dphi
/// per mid vertex. Falls back to a shifted solve when H is not positive
/// definite; `regularized` reports that.
struct EquilibriumAdjoint {
  VecX dphi;
  VecX w;
  bool regularized = false;
};
EquilibriumAdjoint equilibrium_adjoint(const sim::EquilibriumProblem& prob, const VecX& y, const VecX& rhs_y,
                                       const sim::PhiSensitivity& sens, SolveCounter* counter = nullptr);

/// Same with the objective gradient given on the full state z = [x, xhat].
EquilibriumAdjoint equilibrium_adjoint_z(const sim::EquilibriumProblem& prob, const VecX& y, const VecX& dT_dz,
                                         SolveCounter* counter = nullptr);

/// Chains dT/dphi (full mid vertices) to dT/dv in solver coordinates through
/// alpha = atan2(b, a) and the transfer Jacobian.
VecX phi_to_v(const VecX& dT_dphi, const stripes::LevelSet& ls, const VecX& v_full, const SparseMat& P);

}  // namespace stripeforge::inverse
