#include "stripeforge/sensitivity.hpp"

#include "stripeforge/error.hpp"

#include <Eigen/SparseCholesky>

#include <cmath>

namespace stripeforge::inverse {

namespace {

// [[S, -Bv, pin]; [-(Bv)^T, 0, 0]; [pin^T, 0, 0]], pin column omitted when k < 0
SparseMat bordered(const SparseMat& S, const VecX& Bv, int k) {
  const int n = static_cast<int>(S.rows());
  const int extra = k >= 0 ? 2 : 1;
  std::vector<Triplet> t;
  t.reserve(S.nonZeros() + 2 * n + 2);
  for (int c = 0; c < S.outerSize(); ++c)
    for (SparseMat::InnerIterator it(S, c); it; ++it) t.emplace_back(it.row(), it.col(), it.value());
  for (int i = 0; i < n; ++i) {
    if (Bv[i] == 0.0) continue;
    t.emplace_back(i, n, -Bv[i]);
    t.emplace_back(n, i, -Bv[i]);
  }
  if (k >= 0) {
    t.emplace_back(2 * k + 1, n + 1, 1.0);
    t.emplace_back(n + 1, 2 * k + 1, 1.0);
  }
  SparseMat K(n + extra, n + extra);
  K.setFromTriplets(t.begin(), t.end());
  K.makeCompressed();
  return K;
}

}  // namespace

EigenSensitivity::EigenSensitivity(const mesh::TriMesh& mesh, const stripes::StripeMatrices& M,
                                   const stripes::EigenState& state)
    : mesh_(&mesh), M_(&M), state_(state) {
  if (!state.pinned()) throw ValidationError("eigen sensitivity needs a pinned eigenstate");
  const VecX& v = state.v_ref;
  const VecX Bv = M.B * v;
  const SparseMat S = M.A - state.lambda * M.B;
  K_ = bordered(S, Bv, state.k);
  lu_ = std::make_shared<Eigen::SparseLU<SparseMat>>();
  lu_->compute(K_);
  if (lu_->info() != Eigen::Success) {
    throw SolverError("pinned eigen system is singular at pin vertex " + std::to_string(state.k) +
                      ", choose another k");
  }
  // optimality: (A - lambda B) v + mu e_bk = 0, v^T B v = 1, b_k = 0
  const VecX r = S * v;
  mu_ = -r[2 * state.k + 1];
  VecX r1 = r;
  r1[2 * state.k + 1] += mu_;
  residual_ = std::max({r1.cwiseAbs().maxCoeff() / std::max(1.0, eigen::matrix_norm(M.A)), std::abs(v.dot(Bv) - 1.0),
                        std::abs(v[2 * state.k + 1])});
}

EigenSensitivity::Tangent EigenSensitivity::tangent(const VecX& domega) const {
  const int n = static_cast<int>(M_->A.rows());
  const VecX v_full = M_->expand(state_.v_ref);
  const VecX rhs_v = -(M_->P.transpose() * stripes::dA_times(*mesh_, M_->weights, M_->omega, domega, v_full));
  VecX rhs = VecX::Zero(K_.rows());
  rhs.head(n) = rhs_v;
  const VecX sol = lu_->solve(rhs);
  Tangent t;
  t.dv = stripes::rotate(sol.head(n), state_.theta);
  t.dlambda = sol[n];
  t.dmu = sol[n + 1];
  return t;
}

VecX EigenSensitivity::adjoint(const VecX& g, SolveCounter* counter) const {
  const int n = static_cast<int>(M_->A.rows());
  if (g.size() != n) throw ValidationError("adjoint right-hand side has the wrong size");
  VecX rhs = VecX::Zero(K_.rows());
  // v = R(theta) v_ref, so dT/dv_ref = R(-theta) g
  rhs.head(n) = stripes::rotate(g, -state_.theta);
  if (rhs.head(n).squaredNorm() == 0.0) return VecX::Zero(mesh_->num_edges());
  const VecX y = lu_->solve(rhs);
  if (counter) ++counter->eigen_adjoint;
  const VecX y_full = M_->expand(y.head(n));
  const VecX v_full = M_->expand(state_.v_ref);
  return -stripes::dA_contract(*mesh_, M_->weights, M_->omega, y_full, v_full);
}

UnpinnedCheck check_unpinned_singular(const stripes::StripeMatrices& M, const stripes::EigenState& state) {
  const VecX& v = state.pinned() ? state.v_ref : state.v1;
  const VecX Bv = M.B * v;
  const SparseMat S = M.A - state.lambda * M.B;
  const SparseMat K = bordered(S, Bv, -1);
  UnpinnedCheck c;
  Eigen::SparseLU<SparseMat> lu;
  lu.compute(K);
  c.factorization_failed = lu.info() != Eigen::Success;
  VecX null = VecX::Zero(K.rows());
  null.head(v.size()) = stripes::rotate_quarter(v);
  c.null_residual = (K * null).norm() / (std::max(1.0, eigen::matrix_norm(K)) * null.norm());
  return c;
}

EquilibriumAdjoint equilibrium_adjoint(const sim::EquilibriumProblem& prob, const VecX& y, const VecX& rhs_y,
                                       const sim::PhiSensitivity& sens, SolveCounter* counter) {
  EquilibriumAdjoint out;
  out.dphi = VecX::Zero(prob.model->n_mid);
  out.w = VecX::Zero(y.size());
  if (rhs_y.size() != y.size()) throw ValidationError("adjoint right-hand side has the wrong size");
  if (rhs_y.squaredNorm() == 0.0) return out;
  const sim::System sys = sim::assemble_system(prob, y, fem::EvalMode::kHessian);
  const SparseMat& H = sys.hessian;
  Eigen::SimplicialLLT<SparseMat> llt;
  llt.compute(H);
  if (llt.info() != Eigen::Success) {
    out.regularized = true;
    const double shift = 1e-8 * H.diagonal().cwiseAbs().mean();
    SparseMat I(H.rows(), H.cols());
    I.setIdentity();
    Eigen::SparseLU<SparseMat> lu;
    lu.compute(SparseMat(H + shift * I));
    if (lu.info() != Eigen::Success) throw SolverError("equilibrium Hessian is singular at the solution");
    out.w = lu.solve(rhs_y);
  } else {
    out.w = llt.solve(rhs_y);
  }
  if (counter) ++counter->equilibrium_adjoint;
  out.dphi = -(sens.gradient.transpose() * out.w);
  return out;
}

EquilibriumAdjoint equilibrium_adjoint_z(const sim::EquilibriumProblem& prob, const VecX& y, const VecX& dT_dz,
                                         SolveCounter* counter) {
  const VecX rhs = prob.dofs.P().transpose() * dT_dz;
  return equilibrium_adjoint(prob, y, rhs, sim::phi_sensitivity(prob, y), counter);
}

VecX phi_to_v(const VecX& dT_dphi, const stripes::LevelSet& ls, const VecX& v_full, const SparseMat& P) {
  VecX g_full = VecX::Zero(v_full.size());
  for (Index i = 0; i < dT_dphi.size(); ++i) {
    if (dT_dphi[i] == 0.0) continue;
    const double a = v_full[2 * i], b = v_full[2 * i + 1];
    const double r2 = a * a + b * b;
    const double s = dT_dphi[i] * ls.jac[i] / r2;
    g_full[2 * i] = -s * b;
    g_full[2 * i + 1] = s * a;
  }
  return P.transpose() * g_full;
}

}  // namespace stripeforge::inverse
