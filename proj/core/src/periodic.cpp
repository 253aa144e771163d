#include "stripeforge/periodic.hpp"

#include "stripeforge/error.hpp"

#include <sstream>

namespace stripeforge::mesh {

PeriodicMap::PeriodicMap(int num_vertices, std::vector<PeriodicPair> pairs, std::array<Vec3, 2> lattice)
    : pairs_(std::move(pairs)), lattice_(lattice) {
  std::vector<int> partner(num_vertices, -1);
  shift_.assign(num_vertices, {0, 0});
  for (const PeriodicPair& p : pairs_) {
    if (p.plus < 0 || p.plus >= num_vertices || p.minus < 0 || p.minus >= num_vertices) {
      throw ValidationError("periodic pair references an invalid vertex");
    }
    if (partner[p.plus] >= 0) {
      throw ValidationError("vertex " + std::to_string(p.plus) + " appears in two periodic pairs");
    }
    partner[p.plus] = p.minus;
    shift_[p.plus] = {p.axis == PeriodicAxis::kSecond ? 0 : 1, p.axis == PeriodicAxis::kFirst ? 0 : 1};
  }
  for (const PeriodicPair& p : pairs_) {
    if (partner[p.minus] >= 0) {
      throw ValidationError("periodic representative " + std::to_string(p.minus) + " is itself a plus vertex");
    }
  }
  reduction_.assign(num_vertices, -1);
  for (int v = 0; v < num_vertices; ++v) {
    if (partner[v] < 0) {
      reduction_[v] = static_cast<int>(representatives_.size());
      representatives_.push_back(v);
    }
  }
  for (int v = 0; v < num_vertices; ++v) {
    if (partner[v] >= 0) reduction_[v] = reduction_[partner[v]];
  }
}

VecX PeriodicMap::expand(const VecX& reduced, int width) const {
  VecX full(num_full() * width);
  for (int v = 0; v < num_full(); ++v) {
    full.segment(v * width, width) = reduced.segment(reduction_[v] * width, width);
  }
  return full;
}

VecX PeriodicMap::restrict_to_representatives(const VecX& full, int width) const {
  VecX reduced(num_reduced() * width);
  for (int r = 0; r < num_reduced(); ++r) {
    reduced.segment(r * width, width) = full.segment(representatives_[r] * width, width);
  }
  return reduced;
}

VecX PeriodicMap::accumulate(const VecX& full, int width) const {
  VecX reduced = VecX::Zero(num_reduced() * width);
  for (int v = 0; v < num_full(); ++v) {
    reduced.segment(reduction_[v] * width, width) += full.segment(v * width, width);
  }
  return reduced;
}

SparseMat PeriodicMap::expansion_matrix(int width) const {
  std::vector<Triplet> trips;
  trips.reserve(static_cast<size_t>(num_full() * width));
  for (int v = 0; v < num_full(); ++v) {
    for (int c = 0; c < width; ++c) trips.emplace_back(v * width + c, reduction_[v] * width + c, 1.0);
  }
  SparseMat P(num_full() * width, num_reduced() * width);
  P.setFromTriplets(trips.begin(), trips.end());
  return P;
}

namespace {

// Returns the unique boundary vertex within tol of `target`, -1 if none;
// throws on ambiguity.
int find_match(const TriMesh& mesh, const std::vector<int>& boundary, const Vec3& target, double tol, int from) {
  int found = -1;
  for (int w : boundary) {
    if ((mesh.vertex(w) - target).norm() <= tol) {
      if (found >= 0) {
        throw ValidationError("ambiguous periodic match for vertex " + std::to_string(from) + ": candidates " +
                              std::to_string(found) + " and " + std::to_string(w));
      }
      found = w;
    }
  }
  return found;
}

}  // namespace

PeriodicMap build_periodic_map(const TriMesh& mesh, const std::array<Vec3, 2>& lattice, double tol) {
  if (!(tol > 0.0)) throw ValidationError("periodic tolerance must be positive");
  if (lattice[0].norm() <= tol || lattice[1].norm() <= tol) throw ValidationError("degenerate lattice vectors");

  std::vector<int> boundary;
  for (int v = 0; v < mesh.num_vertices(); ++v) {
    if (mesh.is_boundary_vertex(v)) boundary.push_back(v);
  }

  const int n = mesh.num_vertices();
  std::vector<int> back0(n, -1), back1(n, -1), fwd0(n, -1), fwd1(n, -1);
  for (int v : boundary) {
    const Vec3 x = mesh.vertex(v);
    back0[v] = find_match(mesh, boundary, x - lattice[0], tol, v);
    back1[v] = find_match(mesh, boundary, x - lattice[1], tol, v);
    fwd0[v] = find_match(mesh, boundary, x + lattice[0], tol, v);
    fwd1[v] = find_match(mesh, boundary, x + lattice[1], tol, v);
  }

  std::vector<int> unmatched;
  for (int v : boundary) {
    if (back0[v] < 0 && back1[v] < 0 && fwd0[v] < 0 && fwd1[v] < 0) unmatched.push_back(v);
  }
  if (!unmatched.empty()) {
    std::ostringstream msg;
    msg << "unmatched periodic boundary vertices:";
    for (int v : unmatched) msg << ' ' << v;
    throw ValidationError(msg.str());
  }

  std::vector<PeriodicPair> pairs;
  for (int v : boundary) {
    const bool plus0 = back0[v] >= 0;
    const bool plus1 = back1[v] >= 0;
    if (plus0 && plus1) {
      const int rep = find_match(mesh, boundary, mesh.vertex(v) - lattice[0] - lattice[1], tol, v);
      if (rep < 0) throw ValidationError("corner vertex " + std::to_string(v) + " has no diagonal partner");
      pairs.push_back({v, rep, PeriodicAxis::kBoth});
    } else if (plus0) {
      pairs.push_back({v, back0[v], PeriodicAxis::kFirst});
    } else if (plus1) {
      pairs.push_back({v, back1[v], PeriodicAxis::kSecond});
    }
  }
  return PeriodicMap(n, std::move(pairs), lattice);
}

PeriodicMap identity_periodic_map(int num_vertices) {
  return PeriodicMap(num_vertices, {}, {Vec3::Zero(), Vec3::Zero()});
}

}  // namespace stripeforge::mesh
