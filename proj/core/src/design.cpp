#include "stripeforge/design.hpp"

#include "stripeforge/error.hpp"

#include <cmath>
#include <sstream>

namespace stripeforge::inverse {

namespace {

double wrap(double a) { return a - 2.0 * kPi * std::round(a / (2.0 * kPi)); }

double stiffness_factor(const sim::MacroState& st) {
  const double eps = st.strain();
  return 2.0 / (st.area * st.h * eps * eps);
}

}  // namespace

int find_unresolved_triangle(const mesh::TriMesh& mesh, const VecX& alpha) {
  const MatX3i& tris = mesh.triangles();
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    const auto f = tris.row(t);
    const double d01 = wrap(alpha[f[1]] - alpha[f[0]]);
    const double d12 = wrap(alpha[f[2]] - alpha[f[1]]);
    const double d20 = wrap(alpha[f[0]] - alpha[f[2]]);
    if (std::abs(d01 + d12 + d20) > kPi) return t;  // phase winds around the triangle
    const double lo = std::min({0.0, d01, d01 + d12}), hi = std::max({0.0, d01, d01 + d12});
    if (hi - lo >= kPi) return t;
  }
  return -1;
}

DesignProblem::DesignProblem(DesignSetup setup, const VecX& p0) : setup_(std::move(setup)) {
  const auto& obj = setup_.objective;
  if (!(setup_.frequency > 0.0)) throw ValidationError("frequency must be positive");
  if (!(setup_.h > 0.0)) throw ValidationError("h must be positive");
  if (!(obj.dhat > 0.0)) throw ValidationError("dhat must be positive");
  if (obj.weight < 0.0 || obj.w_sing < 0.0 || obj.w_sm < 0.0) throw ValidationError("weights must be non-negative");
  if (obj.kind != ObjectiveKind::kTargetDeformation) {
    if (obj.angles.empty()) throw ValidationError("stiffness objective needs sample angles");
    if (obj.targets.size() != obj.angles.size()) throw ValidationError("targets must match the sample angles");
    if (obj.strain == 0.0) throw ValidationError("strain must be nonzero");
  }

  const double scale = std::max(setup_.lattice[0].norm(), setup_.lattice[1].norm());
  map_ = mesh::build_periodic_map(setup_.mesh, setup_.lattice, 1e-8 * scale);
  frames_ = mesh::tangent_frames(setup_.mesh);
  weights_ = mesh::cotan_edge_weights(setup_.mesh);
  transport_ = frame_transport_angles(setup_.mesh, frames_);
  base_ = fem::extrude_shell(setup_.mesh, setup_.h, mesh::vertex_normals(setup_.mesh), setup_.soft, setup_.stiff);
  if (obj.kind == ObjectiveKind::kTargetDeformation && obj.target.rows() != setup_.mesh.num_vertices()) {
    throw ValidationError("target must have one point per mesh vertex");
  }

  if (p0.size() != num_params()) throw ValidationError("p0 must have one entry per representative vertex");
  if (setup_.pin >= 0) {
    if (setup_.pin >= num_params()) throw ValidationError("pin vertex out of range");
    pin_ = setup_.pin;
  } else {
    const VecX pf = full_params(p0);
    const auto M = stripes::assemble_stripe_matrices(
        setup_.mesh, stripes::edge_omega(setup_.mesh, stripes::field_from_params(pf, setup_.frequency, frames_)),
        weights_, &map_);
    pin_ = stripes::default_pin(stripes::solve_eigenplane(M, setup_.eigen));
  }
}

Evaluation DesignProblem::evaluate(const VecX& p, double theta, const Evaluation* warm) const {
  if (p.size() != num_params()) throw ValidationError("p must have one entry per representative vertex");
  if (!p.allFinite() || !std::isfinite(theta)) throw ValidationError("design parameters must be finite");
  const auto& obj = setup_.objective;
  const mesh::TriMesh& mesh = setup_.mesh;

  Evaluation ev;
  ev.p = p;
  ev.theta = theta;
  const VecX pf = full_params(p);
  ev.matrices = stripes::assemble_stripe_matrices(
      mesh, stripes::edge_omega(mesh, stripes::field_from_params(pf, setup_.frequency, frames_)), weights_, &map_);
  stripes::EigenState st = stripes::solve_eigenplane(ev.matrices, setup_.eigen);
  const double pin_mag = std::max(st.v1.segment<2>(2 * pin_).norm(), st.v2.segment<2>(2 * pin_).norm());
  if (pin_mag < 1e-6) {
    throw RepinRequired("phase magnitude at pin vertex " + std::to_string(pin_) +
                      " fell below 1e-6; restart with another pin");
  }
  st = stripes::pin_reference(std::move(st), pin_);
  st.theta = theta;
  st.v = stripes::eigenvector_at(st, theta);
  ev.eigen = st;
  ev.v_full = ev.matrices.expand(st.v);
  ev.alpha = stripes::phases(ev.v_full);
  const bool simulate = obj.weight != 0.0;
  const int bad = simulate ? find_unresolved_triangle(mesh, ev.alpha) : -1;
  if (bad >= 0) throw SolverError("frequency too high for mesh resolution at triangle " + std::to_string(bad));
  ev.level = stripes::level_set_transfer(ev.alpha, setup_.a1, setup_.a2);
  auto model = std::make_shared<fem::ShellModel>(base_);
  fem::set_level_set(*model, ev.level.phi);
  ev.model = model;

  ev.min_magnitude = 1e300;
  for (Index i = 0; i < st.v.size() / 2; ++i) ev.min_magnitude = std::min(ev.min_magnitude, st.v.segment<2>(2 * i).norm());

  const std::vector<sim::HomogenizationResult>* warm_states = warm ? &warm->states : nullptr;
  if (!simulate) {
    // regularizer-only run
  } else if (obj.kind == ObjectiveKind::kTargetDeformation) {
    sim::MacroState ms;
    ms.theta = obj.load_angle;
    ms.stretch = obj.load_stretch;
    ms.area = sim::cell_area(map_);
    ms.h = setup_.h;
    const sim::HomogenizationResult* w = (warm_states && !warm_states->empty()) ? &warm_states->front() : nullptr;
    ev.states.push_back(sim::homogenize(*ev.model, map_, ms, setup_.homogenization, w));
    const Term t = t_match(fem::mid_surface(*ev.model, ev.states[0].x), obj.target);
    ev.objective = obj.weight * t.value;
  } else {
    ev.states = sim::stiffness_profile(*ev.model, map_, obj.angles, obj.strain, setup_.homogenization, warm_states);
    ev.k.resize(static_cast<Index>(ev.states.size()));
    for (size_t i = 0; i < ev.states.size(); ++i) ev.k[static_cast<Index>(i)] = ev.states[i].young;
    const VecX tk = Eigen::Map<const VecX>(obj.targets.data(), static_cast<Index>(obj.targets.size()));
    if (obj.kind == ObjectiveKind::kStiffnessProfile) {
      ev.objective = obj.weight * t_mat(ev.k, tk).value;
    } else {
      ev.objective = obj.weight * tk.dot(ev.k);
    }
  }

  ev.r_sing = r_sing(st.v, obj.dhat).value;
  ev.r_smooth = r_smooth(mesh, pf, weights_, transport_).value;
  ev.merit = ev.objective + obj.w_sing * ev.r_sing + obj.w_sm * ev.r_smooth;
  return ev;
}

DesignGradient DesignProblem::gradient(const Evaluation& ev) const {
  const auto& obj = setup_.objective;
  const mesh::TriMesh& mesh = setup_.mesh;
  DesignGradient g;

  // mechanical path: dT/dphi through every equilibrium state
  VecX dT_dphi = VecX::Zero(mesh.num_vertices());
  if (obj.weight != 0.0) {
    for (size_t i = 0; i < ev.states.size(); ++i) {
      const sim::HomogenizationResult& s = ev.states[i];
      const sim::EquilibriumProblem& prob = *s.problem;
      const VecX& y = s.solution.y;
      const sim::PhiSensitivity ps = sim::phi_sensitivity(prob, y);
      ++g.solves.equilibrium_states;
      if (obj.kind != ObjectiveKind::kTargetDeformation) {
        // dU/dy vanishes at equilibrium, so the adjoint right-hand side would
        // be the Newton residual alone; it is dropped rather than amplified
        // by near-singular enrichment modes
        const double dk = obj.kind == ObjectiveKind::kStiffnessProfile
                              ? 2.0 * (ev.k[static_cast<Index>(i)] - obj.targets[i])
                              : obj.targets[i];
        dT_dphi += obj.weight * dk * stiffness_factor(s.state) * ps.energy;
      } else {
        const MatX3 mid = fem::mid_surface(*ev.model, s.x);
        const MatX3 dmid = 2.0 * obj.weight * (mid - obj.target);
        VecX dz = VecX::Zero(prob.dofs.num_full());
        const int n = ev.model->n_mid;
        for (int v = 0; v < n; ++v) {
          for (int c = 0; c < 3; ++c) {
            dz[3 * v + c] = 0.5 * dmid(v, c);
            dz[3 * (n + v) + c] = 0.5 * dmid(v, c);
          }
        }
        const EquilibriumAdjoint adj = equilibrium_adjoint(prob, y, prob.dofs.P().transpose() * dz, ps, &g.solves);
        g.regularized = g.regularized || adj.regularized;
        dT_dphi += adj.dphi;
      }
    }
  }

  VecX g_v = phi_to_v(dT_dphi, ev.level, ev.v_full, ev.matrices.P);
  if (obj.w_sing != 0.0) g_v += obj.w_sing * r_sing(ev.eigen.v, obj.dhat).gradient;

  // dv/dtheta = J v
  g.dtheta = g_v.dot(stripes::rotate_quarter(ev.eigen.v));

  const VecX pf = full_params(ev.p);
  VecX dp_full = VecX::Zero(mesh.num_vertices());
  if (g_v.squaredNorm() > 0.0) {
    const EigenSensitivity sens(mesh, ev.matrices, ev.eigen);
    const VecX domega = sens.adjoint(g_v, &g.solves);
    const auto J = stripes::edge_omega_jacobian(mesh, pf, setup_.frequency, frames_);
    for (int e = 0; e < mesh.num_edges(); ++e) {
      const auto& ed = mesh.edges()[e];
      dp_full[ed.i] += domega[e] * J(e, 0);
      dp_full[ed.j] += domega[e] * J(e, 1);
    }
  }
  if (obj.w_sm != 0.0) dp_full += obj.w_sm * r_smooth(mesh, pf, weights_, transport_).gradient;
  g.dp = map_.accumulate(dp_full);
  return g;
}

VecX concentric_params(const DesignProblem& problem) {
  const mesh::TriMesh& mesh = problem.mesh();
  Vec3 origin = Vec3::Zero();
  for (int v = 0; v < mesh.num_vertices(); ++v) origin += mesh.vertex(v);
  origin /= mesh.num_vertices();
  VecX p(problem.num_params());
  for (int r = 0; r < problem.num_params(); ++r) {
    const int v = problem.map().representative(r);
    const Vec3 d = mesh.vertex(v) - origin;
    p[r] = std::atan2(d.dot(problem.frames().t2.row(v)), d.dot(problem.frames().t1.row(v)));
  }
  return p;
}

}  // namespace stripeforge::inverse
