#pragma once

#include "stripeforge/equilibrium.hpp"

#include <cstdint>
#include <memory>
#include <vector>

namespace stripeforge::sim {

/// Uniaxial macro load along direction theta in the lattice plane.
struct MacroState {
  double theta = 0.0;
  double stretch = 1.01;  // d
  double area = 1.0;      // cell area
  double h = 1.0;         // thickness

  double strain() const { return stretch - 1.0; }
};

struct HomogenizationOptions {
  NewtonOptions newton;
  bool perturb = true;            // buckling bias on flat in-plane problems
  double perturb_scale = 1e-6;    // times h
  std::uint64_t seed = 1;
  int threads = 1;  // concurrent angles in stiffness_profile
};

/// Macro deformation F_M = I + eps d d^T + s dp dp^T + g (d dp^T + dp d^T) with
/// d = (cos theta, sin theta, 0), dp its in-plane normal, and (s, g) the free
/// macro scalars (lateral contraction and shear). Period translations are
/// u_a = F_M L_a.
Periodicity macro_boundary_conditions(const MacroState& state, const mesh::PeriodicMap& map);

/// Macro deformation gradient for given free scalars.
Mat3 macro_deformation(const MacroState& state, double s, double g);

struct HomogenizationResult {
  MacroState state;
  std::shared_ptr<EquilibriumProblem> problem;
  Solution solution;
  double energy = 0.0;
  double young = 0.0;  // E_macro
  VecX scalars;        // (s, g)
  MatX3 x, xhat;
};

/// Solves one periodic cell problem. `warm` (optional) supplies the previous
/// full state; its enrichments are carried over where still enriched.
HomogenizationResult homogenize(const fem::ShellModel& model, const mesh::PeriodicMap& map, const MacroState& state,
                                const HomogenizationOptions& opts, const HomogenizationResult* warm = nullptr);

/// E_macro = 2 U / (A h eps^2). Rejects zero strain and unconverged input.
double young_modulus(double energy, const MacroState& state, bool converged = true);

/// One homogenization per angle; k(theta_i) = E_macro(theta_i). Errors name
/// the failing angle.
std::vector<HomogenizationResult> stiffness_profile(const fem::ShellModel& model, const mesh::PeriodicMap& map,
                                                    const std::vector<double>& thetas, double eps,
                                                    const HomogenizationOptions& opts,
                                                    const std::vector<HomogenizationResult>* warm = nullptr);

/// Cell area |L0 x L1| of a periodic map.
double cell_area(const mesh::PeriodicMap& map);

}  // namespace stripeforge::sim
