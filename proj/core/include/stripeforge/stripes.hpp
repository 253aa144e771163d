#pragma once

#include "stripeforge/mesh.hpp"
#include "stripeforge/periodic.hpp"
#include "stripeforge/eigensolver.hpp"

#include <optional>

namespace stripeforge::stripes {

using mesh::PeriodicMap;
using mesh::TangentFrames;
using mesh::TriMesh;

/// z_i = frequency * (cos p_i t1_i + sin p_i t2_i).
MatX3 field_from_params(const VecX& p, double frequency, const TangentFrames& frames);

/// omega_e = 1/2 e^T (z_i + z_j) with e = x_j - x_i, i < j.
VecX edge_omega(const TriMesh& mesh, const MatX3& z);

/// d omega_e / d p_i and d omega_e / d p_j (columns 0 and 1) for each edge.
Eigen::Matrix<double, Eigen::Dynamic, 2> edge_omega_jacobian(const TriMesh& mesh, const VecX& p, double frequency,
                                                             const TangentFrames& frames);

/// A and B in solver coordinates. Without periodicity the solver coordinates
/// are the full per-vertex pairs (a_0, b_0, a_1, b_1, ...); with periodicity
/// they are the pairs of the representative vertices.
struct StripeMatrices {
  SparseMat A;
  SparseMat B;
  VecX omega;
  VecX weights;
  PeriodicMap map;  // identity when not periodic
  SparseMat P;      // expansion, 2*n_full x 2*n_solver

  int num_solver_vertices() const { return map.num_reduced(); }
  VecX expand(const VecX& v) const { return P * v; }
};

/// Assembles E = sum w |Psi_j - exp(i omega) Psi_i|^2 = 1/2 v^T A v and the
/// lumped mass. Throws on an empty edge set or all-zero weights.
StripeMatrices assemble_stripe_matrices(const TriMesh& mesh, const VecX& omega, const VecX& weights,
                                        const PeriodicMap* periodic = nullptr);

/// Full-coordinate product (dA/domega . domega) v.
VecX dA_times(const TriMesh& mesh, const VecX& weights, const VecX& omega, const VecX& domega, const VecX& v_full);

/// Per-edge y^T (dA/domega_e) v in full coordinates.
VecX dA_contract(const TriMesh& mesh, const VecX& weights, const VecX& omega, const VecX& y_full,
                 const VecX& v_full);

/// Per-vertex 90 degree rotation (a, b) -> (-b, a).
VecX rotate_quarter(const VecX& v);
/// Per-vertex rotation by theta.
VecX rotate(const VecX& v, double theta);

struct EigenState {
  double lambda = 0.0;
  double lambda2 = 0.0;
  double lambda3 = 0.0;  // NaN if unavailable
  VecX v1, v2;           // B-orthonormal eigenplane basis (solver coordinates)
  bool gap_warning = false;

  int k = -1;  // pinned solver vertex
  double theta_ref = 0.0;
  VecX v_ref;  // pinned reference (b_k = 0, a_k > 0)
  double theta = 0.0;
  VecX v;  // current eigenvector

  bool pinned() const { return k >= 0; }
};

/// Smallest eigenvalue and its eigenplane. Flags `gap_warning` when the third
/// eigenvalue lies within 1e-10 (relative) of the second.
EigenState solve_eigenplane(const StripeMatrices& M, const eigen::EigenSolverOptions& opts = {});

/// Solver vertex with the largest |(a, b)| in v1.
int default_pin(const EigenState& state);

/// Fixes theta_ref so that b_k = 0 with a_k > 0; sets theta = 0.
EigenState pin_reference(EigenState state, int k);

/// v = cos(theta) v_ref + sin(theta) J v_ref.
VecX eigenvector_at(const EigenState& state, double theta);

/// alpha_i = atan2(b_i, a_i). Throws if |v_i| < 1e-14.
VecX phases(const VecX& v);

struct LevelSet {
  VecX phi;
  VecX jac;  // d phi / d alpha
  double a1 = 0.05;
  double a2 = 0.0;
};

/// phi = 1 - (2/pi) acos((1 - a1) sin(alpha - pi/2)) - a2.
LevelSet level_set_transfer(const VecX& alpha, double a1, double a2);

}  // namespace stripeforge::stripes
