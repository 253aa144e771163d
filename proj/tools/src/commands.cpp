#include "commands.hpp"

#include <stripeforge/error.hpp>
#include <stripeforge/homogenization.hpp>

#include <fstream>
#include <iostream>
#include <random>
#include <sstream>

namespace stripeforge::cli {

namespace {

std::ostream& log(Context& ctx) { return ctx.log ? *ctx.log : std::cout; }

mesh::TriMesh load_mesh(const RunConfig& c, const std::string& cmd) {
  if (!c.mesh) throw ValidationError("mesh: required for " + cmd);
  const MeshSpec& m = *c.mesh;
  if (m.type == "grid") return mesh::make_grid(m.nx, m.ny, m.lx, m.ly);
  if (m.type == "cylinder") return mesh::make_cylinder(m.radius, m.angle, m.length, m.na, m.ny);
  if (!std::filesystem::exists(m.path)) throw ValidationError("mesh: file not found: " + m.path.string());
  return mesh::load_obj(m.path);
}

void require_materials(const RunConfig& c, const std::string& cmd) {
  if (!c.soft) throw ValidationError("materials.soft: required for " + cmd);
  if (!c.stiff) throw ValidationError("materials.stiff: required for " + cmd);
}

void require_lattice(const RunConfig& c, const std::string& cmd) {
  if (!c.lattice) throw ValidationError("lattice: required for " + cmd + " (periodic cell)");
}

struct Pattern {
  explicit Pattern(mesh::TriMesh m) : mesh(std::move(m)) {}

  mesh::TriMesh mesh;
  mesh::PeriodicMap map;
  bool periodic = false;
  mesh::TangentFrames frames;
  VecX p_full;
  double theta = 0.0;
  stripes::StripeMatrices M;
  stripes::EigenState eigen;
  VecX v_full, alpha;
  stripes::LevelSet level;
  std::shared_ptr<fem::ShellModel> model;
};

VecX initial_params(const RunConfig& c, const Pattern& pat, double& theta) {
  const int n = pat.mesh.num_vertices();
  VecX p(n);
  theta = c.theta;
  const FieldSpec& f = c.field;
  if (f.type == "constant") {
    p.setConstant(f.angle);
  } else if (f.type == "concentric") {
    Vec3 origin = Vec3::Zero();
    for (int v = 0; v < n; ++v) origin += pat.mesh.vertex(v);
    origin /= n;
    for (int v = 0; v < n; ++v) {
      const Vec3 d = pat.mesh.vertex(v) - origin;
      p[v] = std::atan2(d.dot(pat.frames.t2.row(v)), d.dot(pat.frames.t1.row(v)));
    }
  } else if (f.type == "noise") {
    std::mt19937_64 rng(c.seed);
    std::uniform_real_distribution<double> U(-f.amplitude, f.amplitude);
    for (int v = 0; v < n; ++v) p[v] = f.base + U(rng);
  } else {
    read_design_csv(f.path, n, p, theta);
  }
  // plus copies follow their representatives
  if (pat.periodic) p = pat.map.expand(pat.map.restrict_to_representatives(p));
  return p;
}

void dump_periodic(Context& ctx, const mesh::PeriodicMap& map) {
  nlohmann::json j;
  j["pairs"] = nlohmann::json::array();
  for (const auto& p : map.pairs()) j["pairs"].push_back({p.plus, p.minus, static_cast<int>(p.axis)});
  for (const Vec3& a : map.lattice()) j["axes"].push_back({a.x(), a.y(), a.z()});
  ctx.out->write_json("periodic_map.json", j);
}

Pattern build_pattern(Context& ctx, const std::string& cmd, bool need_model) {
  const RunConfig& c = ctx.cfg;
  Pattern pat(load_mesh(c, cmd));
  const int n = pat.mesh.num_vertices();
  if (c.lattice) {
    const double scale = std::max((*c.lattice)[0].norm(), (*c.lattice)[1].norm());
    pat.map = mesh::build_periodic_map(pat.mesh, *c.lattice, 1e-8 * scale);
    pat.periodic = true;
    if (ctx.dump_periodic) dump_periodic(ctx, pat.map);
  } else {
    pat.map = mesh::identity_periodic_map(n);
  }
  pat.frames = mesh::tangent_frames(pat.mesh);
  pat.p_full = initial_params(c, pat, pat.theta);
  const VecX weights = mesh::cotan_edge_weights(pat.mesh);
  pat.M = stripes::assemble_stripe_matrices(
      pat.mesh, stripes::edge_omega(pat.mesh, stripes::field_from_params(pat.p_full, c.frequency, pat.frames)), weights,
      pat.periodic ? &pat.map : nullptr);
  stripes::EigenState st = stripes::solve_eigenplane(pat.M);
  const int pin = c.pin >= 0 ? c.pin : stripes::default_pin(st);
  if (pin >= pat.M.num_solver_vertices()) throw ValidationError("stripes.pin: vertex out of range");
  st = stripes::pin_reference(std::move(st), pin);
  st.theta = pat.theta;
  st.v = stripes::eigenvector_at(st, pat.theta);
  pat.eigen = st;
  pat.v_full = pat.M.expand(st.v);
  pat.alpha = stripes::phases(pat.v_full);
  pat.level = stripes::level_set_transfer(pat.alpha, c.a1, c.a2);
  if (need_model) {
    require_materials(c, cmd);
    pat.model = std::make_shared<fem::ShellModel>(
        fem::extrude_shell(pat.mesh, c.h, mesh::vertex_normals(pat.mesh), *c.soft, *c.stiff));
    fem::set_level_set(*pat.model, pat.level.phi);
    if (ctx.dump_prisms) fem::write_subdivision_obj(ctx.out->path("subprisms.obj"), *pat.model);
    const int bad = inverse::find_unresolved_triangle(pat.mesh, pat.alpha);
    if (bad >= 0) throw SolverError("frequency too high for mesh resolution at triangle " + std::to_string(bad));
  }
  return pat;
}

void write_stripes(Context& ctx, const Pattern& pat) {
  CsvWriter csv(ctx.out->path("stripes.csv"), {"vertex_id", "x", "y", "z", "p", "alpha", "phi", "a", "b"});
  for (int v = 0; v < pat.mesh.num_vertices(); ++v) {
    const Vec3 x = pat.mesh.vertex(v);
    csv.row({static_cast<long long>(v), x.x(), x.y(), x.z(), pat.p_full[v], pat.alpha[v], pat.level.phi[v],
             pat.v_full[2 * v], pat.v_full[2 * v + 1]});
  }
  mesh::write_obj(ctx.out->path("stripes.obj"), pat.mesh.vertices(), pat.mesh.triangles(), &pat.level.phi);
}

nlohmann::json eigen_summary(const stripes::EigenState& st) {
  nlohmann::json j;
  j["lambda"] = st.lambda;
  j["lambda2"] = st.lambda2;
  j["lambda3"] = std::isfinite(st.lambda3) ? nlohmann::json(st.lambda3) : nlohmann::json(nullptr);
  j["gap_warning"] = st.gap_warning;
  j["pin"] = st.k;
  j["theta_ref"] = st.theta_ref;
  j["theta"] = st.theta;
  return j;
}

nlohmann::json state_summary(const sim::HomogenizationResult& r) {
  nlohmann::json j;
  j["angle"] = r.state.theta;
  j["stretch"] = r.state.stretch;
  j["energy"] = r.energy;
  j["young"] = r.young;
  j["lateral"] = r.scalars.size() > 0 ? r.scalars[0] : 0.0;
  j["shear"] = r.scalars.size() > 1 ? r.scalars[1] : 0.0;
  j["iterations"] = r.solution.report.iterations;
  j["converged"] = r.solution.report.converged;
  j["residual"] = r.solution.report.residuals.empty() ? 0.0 : r.solution.report.residuals.back();
  return j;
}

void write_stiffness(Context& ctx, const std::vector<sim::HomogenizationResult>& rows) {
  CsvWriter csv(ctx.out->path("stiffness.csv"), {"theta_rad", "k_pa", "energy", "lateral", "shear", "iterations"});
  for (const auto& r : rows) {
    csv.row({r.state.theta, r.young, r.energy, r.scalars.size() > 0 ? r.scalars[0] : 0.0,
             r.scalars.size() > 1 ? r.scalars[1] : 0.0, static_cast<long long>(r.solution.report.iterations)});
  }
}

sim::HomogenizationOptions homogenization_options(const Context& ctx) {
  sim::HomogenizationOptions o = ctx.cfg.homogenization;
  o.threads = ctx.threads;
  return o;
}

int cmd_stripes(Context& ctx) {
  const Pattern pat = build_pattern(ctx, "stripes", false);
  write_stripes(ctx, pat);
  nlohmann::json s = eigen_summary(pat.eigen);
  s["vertices"] = pat.mesh.num_vertices();
  s["periodic"] = pat.periodic;
  s["unresolved_triangle"] = inverse::find_unresolved_triangle(pat.mesh, pat.alpha);
  ctx.out->write_json("summary.json", s);
  log(ctx) << "stripes: lambda " << pat.eigen.lambda << ", lambda2 " << pat.eigen.lambda2 << ", pin " << pat.eigen.k
           << '\n';
  return kOk;
}

int cmd_simulate(Context& ctx) {
  const RunConfig& c = ctx.cfg;
  require_lattice(c, "simulate");
  const Pattern pat = build_pattern(ctx, "simulate", true);
  sim::MacroState st;
  st.theta = c.load_angle;
  st.stretch = c.load_stretch;
  st.area = sim::cell_area(pat.map);
  st.h = c.h;
  const sim::HomogenizationResult r = sim::homogenize(*pat.model, pat.map, st, homogenization_options(ctx));
  const MatX3 mid = fem::mid_surface(*pat.model, r.x);
  write_stripes(ctx, pat);
  mesh::write_obj(ctx.out->path("deformed.obj"), mid, pat.mesh.triangles());
  CsvWriter csv(ctx.out->path("vertices.csv"), {"vertex_id", "X", "Y", "Z", "x", "y", "z", "alpha", "phi"});
  for (int v = 0; v < pat.mesh.num_vertices(); ++v) {
    const Vec3 X = pat.mesh.vertex(v);
    csv.row({static_cast<long long>(v), X.x(), X.y(), X.z(), mid(v, 0), mid(v, 1), mid(v, 2), pat.alpha[v],
             pat.level.phi[v]});
  }
  CsvWriter res(ctx.out->path("residuals.csv"), {"iteration", "residual"});
  const auto& hist = r.solution.report.residuals;
  for (size_t i = 0; i < hist.size(); ++i) res.row({static_cast<long long>(i), hist[i]});
  nlohmann::json s = state_summary(r);
  s["eigen"] = eigen_summary(pat.eigen);
  s["cut_elements"] = pat.model->num_cut();
  ctx.out->write_json("summary.json", s);
  log(ctx) << "simulate: energy " << r.energy << ", E_macro " << r.young << ", newton iterations "
           << r.solution.report.iterations << '\n';
  return kOk;
}

int cmd_homogenize(Context& ctx) {
  const RunConfig& c = ctx.cfg;
  require_lattice(c, "homogenize");
  const Pattern pat = build_pattern(ctx, "homogenize", true);
  const auto rows =
      sim::stiffness_profile(*pat.model, pat.map, c.homogenize_angles, c.homogenize_strain, homogenization_options(ctx));
  write_stripes(ctx, pat);
  write_stiffness(ctx, rows);
  nlohmann::json s;
  s["eigen"] = eigen_summary(pat.eigen);
  s["cut_elements"] = pat.model->num_cut();
  double lo = rows.front().young, hi = lo;
  for (const auto& r : rows) {
    s["states"].push_back(state_summary(r));
    lo = std::min(lo, r.young);
    hi = std::max(hi, r.young);
  }
  s["young_min"] = lo;
  s["young_max"] = hi;
  ctx.out->write_json("summary.json", s);
  log(ctx) << "homogenize: " << rows.size() << " angles, E_macro in [" << lo << ", " << hi << "]\n";
  return kOk;
}

struct DesignRun {
  std::unique_ptr<inverse::DesignProblem> problem;
  VecX p0;
  double theta0 = 0.0;
};

DesignRun design_run(Context& ctx, const std::string& cmd) {
  const RunConfig& c = ctx.cfg;
  require_lattice(c, cmd);
  require_materials(c, cmd);
  const Pattern pat = build_pattern(ctx, cmd, false);

  inverse::DesignSetup s{pat.mesh};
  s.lattice = *c.lattice;
  s.frequency = c.frequency;
  s.a1 = c.a1;
  s.a2 = c.a2;
  s.h = c.h;
  s.soft = *c.soft;
  s.stiff = *c.stiff;
  s.objective = c.objective;
  s.homogenization = homogenization_options(ctx);
  s.pin = c.pin;

  DesignRun run;
  run.p0 = pat.map.restrict_to_representatives(pat.p_full);
  run.theta0 = pat.theta;
  if (s.objective.kind == inverse::ObjectiveKind::kTargetDeformation) {
    if (c.target_mesh.empty()) throw ValidationError("objective.target_mesh: required for target_deformation");
    if (!std::filesystem::exists(c.target_mesh))
      throw ValidationError("objective.target_mesh: file not found: " + c.target_mesh.string());
    s.objective.target = mesh::load_obj(c.target_mesh).vertices();
  } else if (c.isotropic_targets) {
    if (s.objective.kind == inverse::ObjectiveKind::kGeneralizedStiffness)
      throw ValidationError("objective.targets: generalized_stiffness needs explicit coefficients");
    // one isotropic target: the mean stiffness of the start design
    inverse::DesignSetup probe = s;
    probe.objective.w_sing = probe.objective.w_sm = 0.0;
    const inverse::DesignProblem tmp(probe, run.p0);
    const inverse::Evaluation ev = tmp.evaluate(run.p0, run.theta0);
    s.objective.targets.assign(s.objective.angles.size(), ev.k.mean());
    s.pin = tmp.pin();
  }
  run.problem = std::make_unique<inverse::DesignProblem>(std::move(s), run.p0);
  return run;
}

void write_design(Context& ctx, const inverse::DesignProblem& prob, const VecX& p, double theta) {
  const VecX pf = prob.full_params(p);
  CsvWriter csv(ctx.out->path("design.csv"), {"vertex_id", "p", "theta"});
  for (Index v = 0; v < pf.size(); ++v) csv.row({static_cast<long long>(v), pf[v], theta});
}

void write_evaluation(Context& ctx, const inverse::DesignProblem& prob, const inverse::Evaluation& ev) {
  Pattern pat(prob.mesh());
  pat.map = prob.map();
  pat.periodic = true;
  pat.p_full = prob.full_params(ev.p);
  pat.theta = ev.theta;
  pat.eigen = ev.eigen;
  pat.v_full = ev.v_full;
  pat.alpha = ev.alpha;
  pat.level = ev.level;
  write_stripes(ctx, pat);
  if (prob.setup().objective.kind == inverse::ObjectiveKind::kTargetDeformation) {
    if (!ev.states.empty())
      mesh::write_obj(ctx.out->path("deformed.obj"), fem::mid_surface(*ev.model, ev.states[0].x),
                      prob.mesh().triangles());
  } else {
    write_stiffness(ctx, ev.states);
  }
}

nlohmann::json merit_json(const opt::IterRecord& r) {
  return nlohmann::json{{"iter", r.iter},          {"merit", r.value.merit}, {"T", r.value.objective},
                        {"R_sing", r.value.r_sing}, {"R_sm", r.value.r_smooth}, {"grad_norm", r.grad_norm},
                        {"step", r.step},           {"lambda", r.value.lambda}};
}

int cmd_optimize(Context& ctx) {
  const RunConfig& c = ctx.cfg;
  DesignRun run = design_run(ctx, "optimize");
  const inverse::DesignProblem& prob = *run.problem;
  opt::DesignMerit merit(prob, run.theta0, c.optimize_theta);
  opt::OptOptions o = c.optimizer;
  JsonLines jl(ctx.out->path("optimization.jsonl"));
  o.on_iteration = [&](const opt::IterRecord& r) {
    jl.write(merit_json(r));
    log(ctx) << "iter " << r.iter << " merit " << r.value.merit << " |g| " << r.grad_norm << '\n';
  };
  const opt::OptRun res = opt::minimize(merit, merit.pack(run.p0, run.theta0), o);
  VecX p;
  double theta;
  merit.unpack(res.x, p, theta);
  write_design(ctx, prob, p, theta);
  write_evaluation(ctx, prob, *merit.accepted());

  const auto& first = res.history.front().value;
  const auto& last = res.history.back().value;
  nlohmann::json s;
  s["status"] = res.status;
  s["iterations"] = static_cast<int>(res.history.size()) - 1;
  s["initial"] = {{"merit", first.merit}, {"T", first.objective}, {"R_sing", first.r_sing}, {"R_sm", first.r_smooth}};
  s["final"] = {{"merit", last.merit}, {"T", last.objective}, {"R_sing", last.r_sing}, {"R_sm", last.r_smooth}};
  s["objective_reduction"] = first.objective != 0.0 ? 1.0 - last.objective / first.objective : 0.0;
  s["theta"] = theta;
  s["pin"] = prob.pin();
  s["targets"] = prob.setup().objective.targets;
  s["min_phase_magnitude"] = merit.accepted()->min_magnitude;
  ctx.out->write_json("summary.json", s);
  log(ctx) << "optimize: " << res.status << " after " << res.history.size() - 1 << " iterations, T " << first.objective
           << " -> " << last.objective << '\n';
  return kOk;
}

int cmd_grad_check(Context& ctx) {
  const RunConfig& c = ctx.cfg;
  DesignRun run = design_run(ctx, "grad-check");
  opt::DesignMerit merit(*run.problem, run.theta0, c.optimize_theta);
  const opt::GradientCheckReport rep = opt::gradient_check(merit, merit.pack(run.p0, run.theta0), c.probes, c.check_tol,
                                                           c.check_step, c.seed, c.check_floor);
  CsvWriter csv(ctx.out->path("gradcheck.csv"), {"coordinate", "adjoint", "fd", "rel_err", "pass"});
  for (const auto& p : rep.probes) {
    csv.row({static_cast<long long>(p.coordinate), p.adjoint, p.fd, p.rel_err, static_cast<long long>(p.pass)});
  }
  nlohmann::json s;
  s["pass"] = rep.pass;
  s["max_rel_err"] = rep.max_rel_err;
  s["tol"] = c.check_tol;
  s["step"] = c.check_step;
  s["probes"] = rep.probes.size();
  const auto& sv = merit.last_solves();
  s["solves"] = {{"eigen_adjoint", sv.eigen_adjoint},
                 {"equilibrium_adjoint", sv.equilibrium_adjoint},
                 {"equilibrium_states", sv.equilibrium_states}};
  ctx.out->write_json("summary.json", s);
  log(ctx) << "grad-check: max relative error " << rep.max_rel_err << (rep.pass ? " (pass)" : " (FAIL)") << '\n';
  return rep.pass ? kOk : kGradCheckFailed;
}

int cmd_bench_shell(Context& ctx) {
  const auto rows = sim::bench_shell_sweep(ctx.cfg.bench);
  CsvWriter csv(ctx.out->path("bench_shell.csv"), {"resolution", "dofs", "energy", "reference", "rel_gap", "iterations"});
  bool monotone = true;
  for (size_t i = 0; i < rows.size(); ++i) {
    const auto& r = rows[i];
    csv.row({static_cast<long long>(r.resolution), static_cast<long long>(r.dofs), r.energy, r.reference, r.rel_gap,
             static_cast<long long>(r.iterations)});
    if (i > 0 && !(r.energy < rows[i - 1].energy)) monotone = false;
    log(ctx) << "bench-shell: nx " << r.resolution << " dofs " << r.dofs << " gap " << r.rel_gap << '\n';
  }
  nlohmann::json s;
  s["reference"] = rows.front().reference;
  s["monotone"] = monotone;
  s["final_rel_gap"] = rows.back().rel_gap;
  s["final_dofs"] = rows.back().dofs;
  ctx.out->write_json("summary.json", s);
  return kOk;
}

}  // namespace

const std::vector<std::string>& command_names() {
  static const std::vector<std::string> names{"stripes", "simulate", "homogenize", "optimize", "grad-check",
                                              "bench-shell"};
  return names;
}

int run_command(const std::string& name, Context& ctx) {
  if (name == "stripes") return cmd_stripes(ctx);
  if (name == "simulate") return cmd_simulate(ctx);
  if (name == "homogenize") return cmd_homogenize(ctx);
  if (name == "optimize") return cmd_optimize(ctx);
  if (name == "grad-check") return cmd_grad_check(ctx);
  if (name == "bench-shell") return cmd_bench_shell(ctx);
  throw ValidationError("unknown command '" + name + "'");
}

void read_design_csv(const std::filesystem::path& path, int num_vertices, VecX& p, double& theta) {
  std::ifstream in(path);
  if (!in) throw ValidationError("stripes.field.path: cannot open " + path.string());
  std::string line;
  std::getline(in, line);
  if (line.rfind("vertex_id,p,theta", 0) != 0) throw ValidationError("stripes.field.path: expected a design CSV header");
  p = VecX::Zero(num_vertices);
  std::vector<char> seen(num_vertices, 0);
  int count = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string a, b, t;
    if (!std::getline(ss, a, ',') || !std::getline(ss, b, ',') || !std::getline(ss, t, ','))
      throw ValidationError("stripes.field.path: malformed row '" + line + "'");
    const int v = std::stoi(a);
    if (v < 0 || v >= num_vertices || seen[v]) throw ValidationError("stripes.field.path: bad vertex id " + a);
    seen[v] = 1;
    p[v] = std::stod(b);
    theta = std::stod(t);
    ++count;
  }
  if (count != num_vertices) throw ValidationError("stripes.field.path: expected one row per mesh vertex");
}

}  // namespace stripeforge::cli
