#include "stripeforge/equilibrium.hpp"

#include "stripeforge/error.hpp"

#include <Eigen/SparseCholesky>

#include <cmath>
#include <sstream>
#include <limits>
#include <random>

namespace stripeforge::sim {

using fem::ElementKind;
using fem::EvalMode;

EquilibriumProblem make_problem(const fem::ShellModel& model, const Periodicity& per,
                                const std::vector<PinnedDof>& pins, const MatX3& x_ref, const NewtonOptions& opts) {
  EquilibriumProblem p;
  p.model = &model;
  p.dofs = DofMap(model, per, pins, x_ref);
  p.opts = opts;
  double len = 0.0;
  int cnt = 0;
  for (int e = 0; e < model.num_elements(); ++e) {
    for (int k = 0; k < 3; ++k) {
      len += (model.X.row(model.tris(e, k)) - model.X.row(model.tris(e, (k + 1) % 3))).norm();
      ++cnt;
    }
  }
  const double mu = std::max(model.soft.mu, model.stiff.mu);
  p.force_scale = mu * model.h * (cnt ? len / cnt : 1.0);
  return p;
}

namespace {

// Global index of local unknown k of element e (18 or 36 entries).
inline int global_index(const fem::ShellModel& m, const std::array<int, 6>& nodes, int k) {
  const int node_slot = k / 3, comp = k % 3;
  if (node_slot < 6) return 3 * nodes[node_slot] + comp;
  return 3 * m.num_nodes() + 3 * nodes[node_slot - 6] + comp;
}

struct FullAssembly {
  double energy = 0.0;
  VecX grad;
  std::vector<Triplet> trips;
};

FullAssembly assemble_full(const fem::ShellModel& m, const MatX3& x, const MatX3& xhat, EvalMode mode) {
  FullAssembly a;
  if (mode != EvalMode::kEnergy) a.grad = VecX::Zero(6 * m.num_nodes());
  if (mode == EvalMode::kHessian) a.trips.reserve(static_cast<size_t>(m.num_elements()) * 400);
  for (int e = 0; e < m.num_elements(); ++e) {
    fem::ElementResult r;
    try {
      r = fem::evaluate_element(m, e, x, xhat, mode);
    } catch (const SolverError&) {
      throw SolverError("element inversion at element " + std::to_string(e));
    }
    a.energy += r.energy;
    if (mode == EvalMode::kEnergy) continue;
    const auto nodes = m.element_nodes(e);
    const int nl = static_cast<int>(r.gradient.size());
    for (int k = 0; k < nl; ++k) a.grad[global_index(m, nodes, k)] += r.gradient[k];
    if (mode == EvalMode::kHessian) {
      for (int k = 0; k < nl; ++k) {
        const int gk = global_index(m, nodes, k);
        for (int l = 0; l < nl; ++l) a.trips.emplace_back(gk, global_index(m, nodes, l), r.hessian(k, l));
      }
    }
  }
  return a;
}

}  // namespace

double assemble_energy_full(const fem::ShellModel& model, const MatX3& x, const MatX3& xhat, VecX* grad_z) {
  FullAssembly a = assemble_full(model, x, xhat, grad_z ? EvalMode::kGradient : EvalMode::kEnergy);
  if (grad_z) *grad_z = std::move(a.grad);
  return a.energy;
}

System assemble_system(const EquilibriumProblem& prob, const VecX& y, EvalMode mode) {
  const fem::ShellModel& m = *prob.model;
  MatX3 x, xhat;
  prob.dofs.split(prob.dofs.expand(y), x, xhat);
  FullAssembly a = assemble_full(m, x, xhat, mode);
  System s;
  s.energy = a.energy;
  if (mode == EvalMode::kEnergy) return s;
  const SparseMat& P = prob.dofs.P();
  s.gradient = P.transpose() * a.grad;
  if (mode == EvalMode::kHessian) {
    SparseMat H(P.rows(), P.rows());
    H.setFromTriplets(a.trips.begin(), a.trips.end());
    s.hessian = SparseMat(P.transpose() * H * P);
  }
  return s;
}

double residual_norm(const EquilibriumProblem& prob, const VecX& g) {
  return g.cwiseProduct(prob.dofs.column_scale()).norm();
}

Solution static_solve(const EquilibriumProblem& prob, const VecX& y0) {
  const NewtonOptions& o = prob.opts;
  const int n = prob.dofs.num_free();
  Solution sol;
  sol.y = y0;
  sol.report.tolerance = o.tol * prob.force_scale * std::sqrt(std::max(n, 1));
  if (!y0.allFinite()) throw ValidationError("initial guess is not finite");

  System sys = assemble_system(prob, sol.y, EvalMode::kHessian);
  for (int it = 0;; ++it) {
    const double res = residual_norm(prob, sys.gradient);
    sol.report.residuals.push_back(res);
    sol.report.energies.push_back(sys.energy);
    sol.energy = sys.energy;
    sol.report.iterations = it;
    if (res <= sol.report.tolerance) {
      sol.report.converged = true;
      return sol;
    }
    if (it >= o.max_iterations) {
      std::ostringstream msg;
      msg << "Newton did not converge within " << o.max_iterations << " iterations (residual " << res
          << ", tolerance " << sol.report.tolerance << ")";
      throw SolverError(msg.str());
    }

    // regularized Newton direction
    double trace = 0.0;
    for (int i = 0; i < n; ++i) trace += std::abs(sys.hessian.coeff(i, i));
    double shift = 1e-8 * std::max(trace / std::max(n, 1), 1e-300);
    VecX dir;
    bool ok = false;
    SparseMat I(n, n);
    I.setIdentity();
    Eigen::SimplicialLLT<SparseMat> llt;
    llt.analyzePattern(SparseMat(sys.hessian + I));
    for (int k = 0; k <= o.max_shift_increases; ++k, shift *= 10.0) {
      llt.factorize(sys.hessian + shift * I);
      if (llt.info() != Eigen::Success) continue;
      dir = -llt.solve(sys.gradient);
      if (dir.allFinite() && sys.gradient.dot(dir) < 0.0) {
        ok = true;
        break;
      }
    }
    if (!ok) throw SolverError("Hessian regularization exhausted");

    // backtracking on energy
    const double slope = sys.gradient.dot(dir);
    const double U0 = sys.energy;
    const double roundoff = 1e-13 * std::max(std::abs(U0), prob.force_scale * 1e-12);
    double step = 1.0;
    bool accepted = false;
    for (int k = 0; k <= o.max_halvings; ++k, step *= 0.5) {
      const VecX trial = sol.y + step * dir;
      double U = std::numeric_limits<double>::infinity();
      try {
        U = assemble_system(prob, trial, EvalMode::kEnergy).energy;
      } catch (const SolverError&) {
        continue;
      }
      if (U <= U0 + o.armijo * step * slope) {
        accepted = true;
      } else if (U <= U0 + roundoff) {
        // energy differences at roundoff level: accept if the residual drops
        const System s2 = assemble_system(prob, trial, EvalMode::kGradient);
        accepted = residual_norm(prob, s2.gradient) < res;
      }
      if (accepted) {
        sol.y = trial;
        break;
      }
    }
    if (!accepted) throw SolverError("line search failed after " + std::to_string(o.max_halvings) + " halvings");
    sys = assemble_system(prob, sol.y, EvalMode::kHessian);
  }
}

MatX3 perturb_along_normals(const fem::ShellModel& m, const MatX3& x, double amp, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  MatX3 out = x;
  for (int i = 0; i < m.n_mid; ++i) {
    const double s = amp * normal(rng);
    out.row(i) += s * m.normals.row(i);
    out.row(m.n_mid + i) += s * m.normals.row(i);
  }
  return out;
}

PhiSensitivity phi_sensitivity(const EquilibriumProblem& prob, const VecX& y) {
  const fem::ShellModel& m = *prob.model;
  MatX3 x, xhat;
  prob.dofs.split(prob.dofs.expand(y), x, xhat);
  PhiSensitivity s;
  s.energy = VecX::Zero(m.n_mid);
  std::vector<Triplet> trips;
  for (int e = 0; e < m.num_elements(); ++e) {
    if (m.kind[e] != ElementKind::kCut) continue;
    const fem::PhiDerivatives d = fem::cut_element_phi_derivatives(
        m.gather(m.X, e), m.gather(x, e), m.gather(xhat, e), m.element_phi(e), m.soft, m.stiff, m.plan_cut);
    const auto nodes = m.element_nodes(e);
    for (int j = 0; j < 3; ++j) {
      const int v = m.tris(e, j);
      s.energy[v] += d.energy[j];
      for (int k = 0; k < 36; ++k) {
        if (d.gradient(k, j) != 0.0) trips.emplace_back(global_index(m, nodes, k), v, d.gradient(k, j));
      }
    }
  }
  SparseMat Gz(6 * m.num_nodes(), m.n_mid);
  Gz.setFromTriplets(trips.begin(), trips.end());
  s.gradient = SparseMat(prob.dofs.P().transpose() * Gz);
  return s;
}

}  // namespace stripeforge::sim
