#pragma once

#include "stripeforge/periodic.hpp"
#include "stripeforge/shell_model.hpp"

#include <vector>

namespace stripeforge::sim {

/// Affine relation between periodic images: x_plus = R_a x_minus + t_a along
/// lattice axis a, with t_a = t0_a + T_a f linear in the free macro scalars f.
/// Enrichments follow xhat_plus = R_a xhat_minus.
struct Periodicity {
  mesh::PeriodicMap map;  // on mid vertices
  std::array<Mat3, 2> R{Mat3::Identity(), Mat3::Identity()};
  std::array<Vec3, 2> t0{Vec3::Zero(), Vec3::Zero()};
  std::array<MatX, 2> T{MatX::Zero(3, 0), MatX::Zero(3, 0)};

  int num_free() const { return static_cast<int>(T[0].cols()); }
};

/// No periodic pairing, no free scalars.
Periodicity no_periodicity(int n_mid);

struct PinnedDof {
  int node = -1;
  int comp = 0;
};

/// Full state z = [x (3 per node), xhat (3 per node)] expressed as z = P y + z0.
/// y holds representative positions, enrichments of enriched representatives
/// and the free macro scalars (last). Pinned components are held at their
/// value in `x_ref`.
class DofMap {
 public:
  DofMap() = default;
  DofMap(const fem::ShellModel& model, const Periodicity& per, const std::vector<PinnedDof>& pins,
         const MatX3& x_ref);

  int num_free() const { return static_cast<int>(P_.cols()); }
  int num_full() const { return static_cast<int>(P_.rows()); }
  int num_nodes() const { return num_nodes_; }
  int num_free_scalars() const { return num_scalars_; }
  const SparseMat& P() const { return P_; }
  const VecX& z0() const { return z0_; }

  VecX expand(const VecX& y) const { return P_ * y + z0_; }
  void split(const VecX& z, MatX3& x, MatX3& xhat) const;
  VecX join(const MatX3& x, const MatX3& xhat) const;

  /// y from a full state by reading representative values (inverse of expand
  /// on consistent states). Free scalars are passed separately.
  VecX restrict(const MatX3& x, const MatX3& xhat, const VecX& scalars) const;

  /// Column of representative node r, component c (-1 if pinned).
  int x_column(int node, int comp) const { return xcol_[3 * node + comp]; }
  int xhat_column(int node, int comp) const { return hcol_[3 * node + comp]; }
  int scalar_column(int f) const { return num_free() - num_scalars_ + f; }
  /// Per-column length used to make macro-scalar gradients force-like.
  const VecX& column_scale() const { return scale_; }

 private:
  int num_nodes_ = 0;
  int num_scalars_ = 0;
  SparseMat P_;
  VecX z0_;
  std::vector<int> xcol_, hcol_;
  VecX scale_;
};

}  // namespace stripeforge::sim
