#include "stripeforge/stripes.hpp"

#include "stripeforge/error.hpp"

#include <cmath>
#include <limits>
#include <string>

namespace stripeforge::stripes {

MatX3 field_from_params(const VecX& p, double frequency, const TangentFrames& frames) {
  if (p.size() != frames.t1.rows()) throw ValidationError("p must have one entry per vertex");
  MatX3 z(p.size(), 3);
  for (Index i = 0; i < p.size(); ++i) {
    z.row(i) = frequency * (std::cos(p[i]) * frames.t1.row(i) + std::sin(p[i]) * frames.t2.row(i));
  }
  return z;
}

VecX edge_omega(const TriMesh& mesh, const MatX3& z) {
  VecX omega(mesh.num_edges());
  for (int e = 0; e < mesh.num_edges(); ++e) {
    const mesh::Edge& ed = mesh.edges()[e];
    const Vec3 d = mesh.vertex(ed.j) - mesh.vertex(ed.i);
    omega[e] = 0.5 * (d.dot(z.row(ed.i).transpose()) + d.dot(z.row(ed.j).transpose()));
  }
  return omega;
}

Eigen::Matrix<double, Eigen::Dynamic, 2> edge_omega_jacobian(const TriMesh& mesh, const VecX& p, double frequency,
                                                             const TangentFrames& frames) {
  Eigen::Matrix<double, Eigen::Dynamic, 2> J(mesh.num_edges(), 2);
  for (int e = 0; e < mesh.num_edges(); ++e) {
    const mesh::Edge& ed = mesh.edges()[e];
    const Vec3 d = mesh.vertex(ed.j) - mesh.vertex(ed.i);
    int col = 0;
    for (int v : {ed.i, ed.j}) {
      const Vec3 dz = frequency * (-std::sin(p[v]) * frames.t1.row(v) + std::cos(p[v]) * frames.t2.row(v)).transpose();
      J(e, col++) = 0.5 * d.dot(dz);
    }
  }
  return J;
}

namespace {

Mat2 rot(double w) {
  Mat2 R;
  R << std::cos(w), -std::sin(w), std::sin(w), std::cos(w);
  return R;
}

void add_block(std::vector<Triplet>& trips, int bi, int bj, const Mat2& M) {
  for (int r = 0; r < 2; ++r) {
    for (int c = 0; c < 2; ++c) {
      if (M(r, c) != 0.0) trips.emplace_back(2 * bi + r, 2 * bj + c, M(r, c));
    }
  }
}

}  // namespace

StripeMatrices assemble_stripe_matrices(const TriMesh& mesh, const VecX& omega, const VecX& weights,
                                        const PeriodicMap* periodic) {
  if (mesh.num_edges() == 0) throw ValidationError("stripe assembly needs at least one edge");
  if (omega.size() != mesh.num_edges() || weights.size() != mesh.num_edges()) {
    throw ValidationError("omega/weights must have one entry per edge");
  }
  if (weights.minCoeff() < 0.0) throw ValidationError("stripe weights must be non-negative");
  if (weights.maxCoeff() <= 0.0) throw ValidationError("all stripe weights are zero");

  const int n = mesh.num_vertices();
  std::vector<Triplet> trips;
  trips.reserve(static_cast<size_t>(mesh.num_edges()) * 16);
  for (int e = 0; e < mesh.num_edges(); ++e) {
    const double w = weights[e];
    if (w == 0.0) continue;
    const mesh::Edge& ed = mesh.edges()[e];
    const Mat2 R = rot(omega[e]);
    add_block(trips, ed.i, ed.i, 2.0 * w * Mat2::Identity());
    add_block(trips, ed.j, ed.j, 2.0 * w * Mat2::Identity());
    add_block(trips, ed.j, ed.i, -2.0 * w * R);
    add_block(trips, ed.i, ed.j, -2.0 * w * R.transpose());
  }
  SparseMat A(2 * n, 2 * n);
  A.setFromTriplets(trips.begin(), trips.end());

  const VecX area = mesh::lumped_vertex_areas(mesh);
  SparseMat B(2 * n, 2 * n);
  {
    std::vector<Triplet> bt;
    for (int v = 0; v < n; ++v) {
      bt.emplace_back(2 * v, 2 * v, area[v]);
      bt.emplace_back(2 * v + 1, 2 * v + 1, area[v]);
    }
    B.setFromTriplets(bt.begin(), bt.end());
  }

  StripeMatrices M;
  M.omega = omega;
  M.weights = weights;
  M.map = periodic ? *periodic : mesh::identity_periodic_map(n);
  if (M.map.num_full() != n) throw ValidationError("periodic map does not match the mesh");
  M.P = M.map.expansion_matrix(2);
  if (periodic) {
    M.A = SparseMat(M.P.transpose() * A * M.P);
    M.B = SparseMat(M.P.transpose() * B * M.P);
  } else {
    M.A = std::move(A);
    M.B = std::move(B);
  }
  return M;
}

VecX dA_times(const TriMesh& mesh, const VecX& weights, const VecX& omega, const VecX& domega, const VecX& v_full) {
  VecX out = VecX::Zero(v_full.size());
  for (int e = 0; e < mesh.num_edges(); ++e) {
    if (domega[e] == 0.0 || weights[e] == 0.0) continue;
    const mesh::Edge& ed = mesh.edges()[e];
    Mat2 dR;
    dR << -std::sin(omega[e]), -std::cos(omega[e]), std::cos(omega[e]), -std::sin(omega[e]);
    const double s = -2.0 * weights[e] * domega[e];
    out.segment<2>(2 * ed.j) += s * dR * v_full.segment<2>(2 * ed.i);
    out.segment<2>(2 * ed.i) += s * dR.transpose() * v_full.segment<2>(2 * ed.j);
  }
  return out;
}

VecX dA_contract(const TriMesh& mesh, const VecX& weights, const VecX& omega, const VecX& y_full,
                 const VecX& v_full) {
  VecX out(mesh.num_edges());
  for (int e = 0; e < mesh.num_edges(); ++e) {
    const mesh::Edge& ed = mesh.edges()[e];
    Mat2 dR;
    dR << -std::sin(omega[e]), -std::cos(omega[e]), std::cos(omega[e]), -std::sin(omega[e]);
    const Vec2 yi = y_full.segment<2>(2 * ed.i), yj = y_full.segment<2>(2 * ed.j);
    const Vec2 vi = v_full.segment<2>(2 * ed.i), vj = v_full.segment<2>(2 * ed.j);
    out[e] = -2.0 * weights[e] * (yj.dot(dR * vi) + yi.dot(dR.transpose() * vj));
  }
  return out;
}

VecX rotate_quarter(const VecX& v) {
  VecX out(v.size());
  for (Index i = 0; i + 1 < v.size(); i += 2) {
    out[i] = -v[i + 1];
    out[i + 1] = v[i];
  }
  return out;
}

VecX rotate(const VecX& v, double theta) { return std::cos(theta) * v + std::sin(theta) * rotate_quarter(v); }

EigenState solve_eigenplane(const StripeMatrices& M, const eigen::EigenSolverOptions& opts) {
  const int dim = static_cast<int>(M.A.rows());
  const int want = std::min(dim, 3);
  if (want < 2) throw ValidationError("eigenplane needs at least one vertex");
  const eigen::GenEigResult r = eigen::smallest_eigenpairs(M.A, M.B, want, opts);
  EigenState s;
  s.lambda = r.values[0];
  s.lambda2 = r.values[1];
  s.lambda3 = want > 2 ? r.values[2] : std::numeric_limits<double>::quiet_NaN();
  s.v1 = r.vectors.col(0);
  s.v2 = r.vectors.col(1);
  if (want > 2) s.gap_warning = (s.lambda3 - s.lambda2) < 1e-10 * std::max(1.0, std::abs(s.lambda3));
  return s;
}

int default_pin(const EigenState& state) {
  int best = 0;
  double best_mag = -1.0;
  for (Index i = 0; 2 * i + 1 < state.v1.size(); ++i) {
    const double m = state.v1.segment<2>(2 * i).norm();
    if (m > best_mag * (1.0 + 1e-12)) {
      best_mag = m;
      best = static_cast<int>(i);
    }
  }
  return best;
}

EigenState pin_reference(EigenState state, int k) {
  if (k < 0 || 2 * k + 1 >= state.v1.size()) throw ValidationError("pin vertex out of range");
  const double a1 = state.v1[2 * k], b1 = state.v1[2 * k + 1];
  const double a2 = state.v2[2 * k], b2 = state.v2[2 * k + 1];
  if (std::hypot(a1, b1) < 1e-10 && std::hypot(a2, b2) < 1e-10) {
    throw ValidationError("pin vertex has vanishing phase, choose another k");
  }
  double th = std::atan2(-b1, b2);
  if (a1 * std::cos(th) + a2 * std::sin(th) < 0.0) th += kPi;
  state.k = k;
  state.theta_ref = th;
  state.v_ref = std::cos(th) * state.v1 + std::sin(th) * state.v2;
  state.v_ref[2 * k + 1] = 0.0;  // exact by construction up to roundoff
  state.theta = 0.0;
  state.v = state.v_ref;
  return state;
}

VecX eigenvector_at(const EigenState& state, double theta) {
  if (!state.pinned()) throw ValidationError("eigenstate is not pinned");
  return rotate(state.v_ref, theta);
}

VecX phases(const VecX& v) {
  VecX alpha(v.size() / 2);
  for (Index i = 0; i < alpha.size(); ++i) {
    const double a = v[2 * i], b = v[2 * i + 1];
    if (std::hypot(a, b) < 1e-14) throw SolverError("vanishing phase at vertex " + std::to_string(i));
    alpha[i] = std::atan2(b, a);
  }
  return alpha;
}

LevelSet level_set_transfer(const VecX& alpha, double a1, double a2) {
  if (!(a1 > 0.0 && a1 <= 1.0)) throw ValidationError("a1 must lie in (0, 1]");
  if (!(a2 >= -1.0 && a2 <= 1.0)) throw ValidationError("a2 must lie in [-1, 1]");
  LevelSet ls;
  ls.a1 = a1;
  ls.a2 = a2;
  ls.phi.resize(alpha.size());
  ls.jac.resize(alpha.size());
  const double c = 1.0 - a1;
  for (Index i = 0; i < alpha.size(); ++i) {
    const double s = c * std::sin(alpha[i] - 0.5 * kPi);
    ls.phi[i] = 1.0 - (2.0 / kPi) * std::acos(s) - a2;
    // d acos(s)/ds = -1/sqrt(1-s^2), ds/dalpha = c cos(alpha - pi/2)
    ls.jac[i] = (2.0 / kPi) * c * std::cos(alpha[i] - 0.5 * kPi) / std::sqrt(1.0 - s * s);
  }
  return ls;
}

}  // namespace stripeforge::stripes
