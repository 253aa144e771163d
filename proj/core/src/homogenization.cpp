#include "stripeforge/homogenization.hpp"

#include "stripeforge/error.hpp"

#include <Eigen/Geometry>

#include <cmath>
#include <sstream>
#include <thread>

namespace stripeforge::sim {

namespace {

void directions(double theta, Vec3& d, Vec3& dp) {
  d = Vec3(std::cos(theta), std::sin(theta), 0.0);
  dp = Vec3(-std::sin(theta), std::cos(theta), 0.0);
}

}  // namespace

double cell_area(const mesh::PeriodicMap& map) { return map.lattice()[0].cross(map.lattice()[1]).norm(); }

Mat3 macro_deformation(const MacroState& st, double s, double g) {
  Vec3 d, dp;
  directions(st.theta, d, dp);
  return Mat3::Identity() + st.strain() * d * d.transpose() + s * dp * dp.transpose() +
         g * (d * dp.transpose() + dp * d.transpose());
}

Periodicity macro_boundary_conditions(const MacroState& st, const mesh::PeriodicMap& map) {
  Vec3 d, dp;
  directions(st.theta, d, dp);
  Periodicity p;
  p.map = map;
  const Mat3 F0 = macro_deformation(st, 0.0, 0.0);
  const Mat3 Ds = dp * dp.transpose();
  const Mat3 Dg = d * dp.transpose() + dp * d.transpose();
  for (int a = 0; a < 2; ++a) {
    const Vec3 L = map.lattice()[a];
    p.t0[a] = F0 * L;
    p.T[a].resize(3, 2);
    p.T[a].col(0) = Ds * L;
    p.T[a].col(1) = Dg * L;
  }
  return p;
}

double young_modulus(double energy, const MacroState& st, bool converged) {
  if (!converged) throw ValidationError("E_macro requires a converged equilibrium");
  const double eps = st.strain();
  if (std::abs(eps) < 1e-12) throw ValidationError("E_macro undefined at zero strain");
  if (!(st.area > 0.0) || !(st.h > 0.0)) throw ValidationError("cell area and thickness must be positive");
  return 2.0 * energy / (st.area * st.h * eps * eps);
}

HomogenizationResult homogenize(const fem::ShellModel& model, const mesh::PeriodicMap& map, const MacroState& state,
                                const HomogenizationOptions& opts, const HomogenizationResult* warm) {
  if (!(state.stretch > 0.0)) throw ValidationError("stretch must be positive");
  HomogenizationResult r;
  r.state = state;
  const Periodicity per = macro_boundary_conditions(state, map);

  // pin the bottom node under the representative closest to the cell centre
  const MatX3 mid = fem::mid_surface(model, model.X);
  const Vec3 centre = mid.colwise().mean().transpose();
  int pin = -1;
  double best = 1e300;
  for (int r_id = 0; r_id < map.num_reduced(); ++r_id) {
    const int v = map.representative(r_id);
    const double dist = (mid.row(v).transpose() - centre).norm();
    if (dist < best) {
      best = dist;
      pin = v;
    }
  }

  MatX3 x0, xh0;
  VecX scalars = VecX::Zero(2);
  if (warm && warm->x.rows() == model.num_nodes()) {
    x0 = warm->x;
    xh0 = warm->xhat;
    scalars = warm->scalars;
    // re-anchor the pinned node to the current macro map
    const Mat3 F = macro_deformation(state, 0.0, 0.0);
    const Vec3 shift = F * model.X.row(pin).transpose() - x0.row(pin).transpose();
    x0.rowwise() += shift.transpose();
  } else {
    x0 = model.X * macro_deformation(state, 0.0, 0.0).transpose();
    xh0 = MatX3::Zero(model.num_nodes(), 3);
    if (opts.perturb) {
      x0 = perturb_along_normals(model, x0, opts.perturb_scale * model.h, opts.seed);
      // keep the pin where a warm start would put it
      const Vec3 shift = macro_deformation(state, 0.0, 0.0) * model.X.row(pin).transpose() - x0.row(pin).transpose();
      x0.rowwise() += shift.transpose();
    }
  }
  for (int n = 0; n < model.num_nodes(); ++n) {
    if (!model.enriched[n]) xh0.row(n).setZero();
  }

  std::vector<PinnedDof> pins = {{pin, 0}, {pin, 1}, {pin, 2}};
  r.problem = std::make_shared<EquilibriumProblem>(make_problem(model, per, pins, x0, opts.newton));
  const VecX y0 = r.problem->dofs.restrict(x0, xh0, scalars);
  r.solution = static_solve(*r.problem, y0);
  r.energy = r.solution.energy;
  r.problem->dofs.split(r.problem->dofs.expand(r.solution.y), r.x, r.xhat);
  r.scalars = r.solution.y.tail(2);
  r.young = young_modulus(r.energy, state, r.solution.report.converged);
  return r;
}

std::vector<HomogenizationResult> stiffness_profile(const fem::ShellModel& model, const mesh::PeriodicMap& map,
                                                    const std::vector<double>& thetas, double eps,
                                                    const HomogenizationOptions& opts,
                                                    const std::vector<HomogenizationResult>* warm) {
  const size_t n = thetas.size();
  std::vector<HomogenizationResult> out(n);
  std::vector<std::string> errors(n);
  auto solve = [&](size_t i) {
    MacroState st;
    st.theta = thetas[i];
    st.stretch = 1.0 + eps;
    st.area = cell_area(map);
    st.h = model.h;
    const HomogenizationResult* w = (warm && i < warm->size()) ? &(*warm)[i] : nullptr;
    try {
      out[i] = homogenize(model, map, st, opts, w);
    } catch (const SolverError& e) {
      std::ostringstream msg;
      msg << "homogenization failed at theta = " << thetas[i] << ": " << e.what();
      errors[i] = msg.str();
    }
  };
  const int workers = static_cast<int>(std::min<size_t>(std::max(opts.threads, 1), n));
  if (workers <= 1) {
    for (size_t i = 0; i < n; ++i) solve(i);
  } else {
    // angles are independent; results land in their own slots
    std::vector<std::thread> pool;
    for (int t = 0; t < workers; ++t) {
      pool.emplace_back([&, t] {
        for (size_t i = t; i < n; i += workers) solve(i);
      });
    }
    for (auto& th : pool) th.join();
  }
  for (size_t i = 0; i < n; ++i) {
    if (!errors[i].empty()) throw SolverError(errors[i]);
  }
  return out;
}

}  // namespace stripeforge::sim
