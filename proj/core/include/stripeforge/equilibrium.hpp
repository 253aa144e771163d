#pragma once

#include "stripeforge/dof_map.hpp"

#include <cstdint>
#include <vector>

namespace stripeforge::sim {

struct NewtonOptions {
  int max_iterations = 100;
  double tol = 1e-8;  // relative to force_scale * sqrt(#dofs)
  int max_halvings = 40;
  int max_shift_increases = 24;
  double armijo = 1e-4;
};

struct EquilibriumProblem {
  const fem::ShellModel* model = nullptr;
  DofMap dofs;
  NewtonOptions opts;
  double force_scale = 1.0;  // typical nodal force, mu_max * h * mean edge length
};

/// Builds the problem and sets force_scale from the model.
EquilibriumProblem make_problem(const fem::ShellModel& model, const Periodicity& per,
                                const std::vector<PinnedDof>& pins, const MatX3& x_ref, const NewtonOptions& opts);

struct System {
  double energy = 0.0;
  VecX gradient;    // in y
  SparseMat hessian;  // in y
};

/// Energy and projected derivatives at y. Throws SolverError naming the
/// element on inversion.
System assemble_system(const EquilibriumProblem& prob, const VecX& y, fem::EvalMode mode);

/// Full-state (z) energy and gradient, used by the projection cross-checks.
double assemble_energy_full(const fem::ShellModel& model, const MatX3& x, const MatX3& xhat, VecX* grad_z);

struct SolveReport {
  bool converged = false;
  int iterations = 0;
  std::vector<double> residuals;
  std::vector<double> energies;
  double tolerance = 0.0;
};

struct Solution {
  VecX y;
  double energy = 0.0;
  SolveReport report;
};

/// Scaled residual norm used for convergence.
double residual_norm(const EquilibriumProblem& prob, const VecX& gradient);

/// Projected Newton with adaptive diagonal shift and Armijo backtracking.
/// Throws SolverError on max iterations, line-search failure or exhausted
/// regularization.
Solution static_solve(const EquilibriumProblem& prob, const VecX& y0);

/// Normal-direction random perturbation of amplitude `amp` (seeded) applied to
/// both faces of every mid vertex.
MatX3 perturb_along_normals(const fem::ShellModel& model, const MatX3& x, double amp, std::uint64_t seed);

/// Level-set derivatives at a state: dU/dphi per mid vertex and the sparse
/// mixed derivative d(gradient_y)/dphi (rows y, cols mid vertices).
struct PhiSensitivity {
  VecX energy;
  SparseMat gradient;
};
PhiSensitivity phi_sensitivity(const EquilibriumProblem& prob, const VecX& y);

}  // namespace stripeforge::sim
