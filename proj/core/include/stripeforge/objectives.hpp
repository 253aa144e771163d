#pragma once

#include "stripeforge/mesh.hpp"

namespace stripeforge::inverse {

/// Scalar term with its gradient.
struct Term {
  double value = 0.0;
  VecX gradient;
};

/// |x - xt|^2, gradient flattened row-major (3 per row).
Term t_match(const MatX3& x, const MatX3& xt);

/// sum |k_i - khat_i|^2.
Term t_mat(const VecX& k, const VecX& khat);

/// Barrier -(d - dhat)^2 ln(d / dhat) for 0 < d <= dhat, zero above.
double r_sing_scalar(double d, double dhat);
double r_sing_derivative(double d, double dhat);

/// Sum of the barrier over the per-vertex magnitudes of v = (a0, b0, a1, ...).
/// Gradient with respect to v. Throws if some |v_i| is zero.
Term r_sing(const VecX& v, double dhat);

/// Angle taking the tangent frame of e.j into the frame of e.i after parallel
/// transport along the edge (zero on flat meshes with aligned frames).
VecX frame_transport_angles(const mesh::TriMesh& mesh, const mesh::TangentFrames& frames);

/// sum_e w_e |exp(i p_i) - exp(i (p_j + delta_e))|^2 over mesh edges.
Term r_smooth(const mesh::TriMesh& mesh, const VecX& p, const VecX& weights, const VecX& transport);

}  // namespace stripeforge::inverse
