#include "stripeforge/dof_map.hpp"

#include "stripeforge/error.hpp"

#include <set>

namespace stripeforge::sim {

Periodicity no_periodicity(int n_mid) {
  Periodicity p;
  p.map = mesh::identity_periodic_map(n_mid);
  return p;
}

DofMap::DofMap(const fem::ShellModel& model, const Periodicity& per, const std::vector<PinnedDof>& pins,
               const MatX3& x_ref) {
  const int n = model.n_mid;
  const int N = model.num_nodes();
  num_nodes_ = N;
  num_scalars_ = per.num_free();
  if (per.map.num_full() != n) throw ValidationError("periodic map does not match the shell mid-surface");
  if (per.T[1].cols() != num_scalars_) throw ValidationError("inconsistent macro scalar layout");

  auto rep_node = [&](int node) {
    const int layer = node / n, v = node % n;
    return layer * n + per.map.representative(per.map.reduce(v));
  };

  std::set<std::pair<int, int>> pinned;
  for (const PinnedDof& p : pins) {
    if (p.node < 0 || p.node >= N || p.comp < 0 || p.comp > 2) throw ValidationError("invalid pinned DOF");
    if (rep_node(p.node) != p.node) throw ValidationError("pinned node must be a periodic representative");
    pinned.insert({p.node, p.comp});
  }

  std::vector<char> rep_enriched(N, 0);
  for (int node = 0; node < N; ++node) {
    if (model.enriched[node]) rep_enriched[rep_node(node)] = 1;
  }

  // number free columns: x of reps, xhat of enriched reps, then macro scalars
  xcol_.assign(3 * N, -1);
  hcol_.assign(3 * N, -1);
  int col = 0;
  for (int node = 0; node < N; ++node) {
    if (rep_node(node) != node) continue;
    for (int c = 0; c < 3; ++c) {
      if (!pinned.count({node, c})) xcol_[3 * node + c] = col++;
    }
  }
  for (int node = 0; node < N; ++node) {
    if (rep_node(node) != node || !rep_enriched[node]) continue;
    for (int c = 0; c < 3; ++c) hcol_[3 * node + c] = col++;
  }
  const int ncols = col + num_scalars_;

  std::vector<Triplet> trips;
  z0_ = VecX::Zero(6 * N);
  for (int node = 0; node < N; ++node) {
    const int r = rep_node(node);
    const auto& sh = per.map.shift(node % n);
    Mat3 R = Mat3::Identity();
    Vec3 t = Vec3::Zero();
    MatX Tf = MatX::Zero(3, num_scalars_);
    if (sh[1]) {
      R = per.R[1];
      t = per.t0[1];
      Tf = per.T[1];
    }
    if (sh[0]) {
      t = per.R[0] * t + per.t0[0];
      Tf = per.R[0] * Tf + per.T[0];
      R = per.R[0] * R;
    }
    for (int i = 0; i < 3; ++i) {
      const int row = 3 * node + i;
      z0_[row] += t[i];
      for (int f = 0; f < num_scalars_; ++f) {
        if (Tf(i, f) != 0.0) trips.emplace_back(row, col + f, Tf(i, f));
      }
      for (int c = 0; c < 3; ++c) {
        if (R(i, c) == 0.0) continue;
        const int xc = xcol_[3 * r + c];
        if (xc >= 0) {
          trips.emplace_back(row, xc, R(i, c));
        } else {
          z0_[row] += R(i, c) * x_ref(r, c);
        }
        const int hc = hcol_[3 * r + c];
        if (hc >= 0) trips.emplace_back(3 * N + row, hc, R(i, c));
      }
    }
  }
  P_.resize(6 * N, ncols);
  P_.setFromTriplets(trips.begin(), trips.end());

  scale_ = VecX::Ones(ncols);
  const Vec3 L0 = per.map.lattice()[0], L1 = per.map.lattice()[1];
  const double len = std::max(std::max(L0.norm(), L1.norm()), 1e-300);
  for (int f = 0; f < num_scalars_; ++f) scale_[col + f] = 1.0 / len;
}

void DofMap::split(const VecX& z, MatX3& x, MatX3& xhat) const {
  x.resize(num_nodes_, 3);
  xhat.resize(num_nodes_, 3);
  for (int node = 0; node < num_nodes_; ++node) {
    x.row(node) = z.segment<3>(3 * node).transpose();
    xhat.row(node) = z.segment<3>(3 * num_nodes_ + 3 * node).transpose();
  }
}

VecX DofMap::join(const MatX3& x, const MatX3& xhat) const {
  VecX z(6 * num_nodes_);
  for (int node = 0; node < num_nodes_; ++node) {
    z.segment<3>(3 * node) = x.row(node).transpose();
    z.segment<3>(3 * num_nodes_ + 3 * node) = xhat.row(node).transpose();
  }
  return z;
}

VecX DofMap::restrict(const MatX3& x, const MatX3& xhat, const VecX& scalars) const {
  if (scalars.size() != num_scalars_) throw ValidationError("wrong number of macro scalars");
  VecX y = VecX::Zero(num_free());
  for (int node = 0; node < num_nodes_; ++node) {
    for (int c = 0; c < 3; ++c) {
      if (xcol_[3 * node + c] >= 0) y[xcol_[3 * node + c]] = x(node, c);
      if (hcol_[3 * node + c] >= 0) y[hcol_[3 * node + c]] = xhat(node, c);
    }
  }
  y.tail(num_scalars_) = scalars;
  return y;
}

}  // namespace stripeforge::sim
