#pragma once

#include "stripeforge/mesh.hpp"

#include <array>
#include <vector>

namespace stripeforge::mesh {

/// Lattice direction(s) spanned by a periodic pair.
enum class PeriodicAxis : int { kFirst = 0, kSecond = 1, kBoth = 2 };

struct PeriodicPair {
  int plus = -1;   // removed vertex (larger coordinate along the axis)
  int minus = -1;  // representative
  PeriodicAxis axis = PeriodicAxis::kFirst;
};

/// Boundary-vertex pairing of a rectangular unit cell and the induced reduction
/// from full vertex ids to representative (constrained) ids.
///
/// Plus vertices are those displaced by +lattice[a] from their partner; corner
/// vertices are mapped directly to the single representative corner.
class PeriodicMap {
 public:
  PeriodicMap() = default;
  PeriodicMap(int num_vertices, std::vector<PeriodicPair> pairs, std::array<Vec3, 2> lattice);

  const std::vector<PeriodicPair>& pairs() const { return pairs_; }
  const std::array<Vec3, 2>& lattice() const { return lattice_; }
  int num_full() const { return static_cast<int>(reduction_.size()); }
  int num_reduced() const { return static_cast<int>(representatives_.size()); }

  /// Full vertex id -> reduced id.
  int reduce(int v) const { return reduction_[v]; }
  /// Reduced id -> the full id of its representative vertex.
  int representative(int r) const { return representatives_[r]; }
  bool is_plus(int v) const { return shift_[v][0] != 0 || shift_[v][1] != 0; }
  /// Number of lattice vectors (per axis) separating v from its representative.
  const std::array<int, 2>& shift(int v) const { return shift_[v]; }

  /// Scalar-per-vertex expansion/reduction with `width` components per vertex.
  VecX expand(const VecX& reduced, int width = 1) const;
  /// Picks the representative entries of a full vector.
  VecX restrict_to_representatives(const VecX& full, int width = 1) const;
  /// Sums full entries onto their representatives (the transpose of expand).
  VecX accumulate(const VecX& full, int width = 1) const;
  /// Sparse 0/1 expansion matrix with `width` components per vertex.
  SparseMat expansion_matrix(int width) const;

 private:
  std::vector<PeriodicPair> pairs_;
  std::array<Vec3, 2> lattice_{Vec3::Zero(), Vec3::Zero()};
  std::vector<int> reduction_;
  std::vector<int> representatives_;
  std::vector<std::array<int, 2>> shift_;
};

/// Matches opposite boundaries of a unit cell congruent under the two lattice
/// translations within `tol`. Throws ValidationError listing unmatched vertices
/// or on ambiguous matches.
PeriodicMap build_periodic_map(const TriMesh& mesh, const std::array<Vec3, 2>& lattice, double tol);

/// Identity map (no periodicity).
PeriodicMap identity_periodic_map(int num_vertices);

}  // namespace stripeforge::mesh
