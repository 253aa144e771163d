#include "stripeforge/bench_shell.hpp"

#include "stripeforge/error.hpp"
#include "stripeforge/periodic.hpp"
#include "stripeforge/shell_model.hpp"

#include <Eigen/Geometry>

#include <cmath>

namespace stripeforge::sim {

double kirchhoff_bending_energy(double area, double young, double poisson, double h, double radius) {
  return area * young * h * h * h / (24.0 * (1.0 - poisson * poisson) * radius * radius);
}

BenchShellRow bench_shell_run(const BenchShellOptions& o, int nx) {
  if (nx < 2 || nx % 2 != 0) throw ValidationError("bench resolution must be an even number >= 2");
  if (o.ny < 1) throw ValidationError("ny must be positive");
  if (!(o.radius > 0.0 && o.h > 0.0 && o.length > 0.0 && o.width > 0.0 && o.young > 0.0)) {
    throw ValidationError("bench geometry and modulus must be positive");
  }
  const mesh::TriMesh mesh = mesh::make_grid(nx, o.ny, o.length, o.width);
  const fem::Material mat = fem::from_young_poisson(o.young, o.poisson);
  fem::ShellModel model = fem::extrude_shell(mesh, o.h, mesh::vertex_normals(mesh), mat, mat);

  const std::array<Vec3, 2> lattice{Vec3(o.length, 0, 0), Vec3(0, o.width, 0)};
  Periodicity per;
  per.map = mesh::build_periodic_map(mesh, lattice, 1e-9 * o.length);
  const double psi = -o.length / o.radius;
  const Mat3 R = Eigen::AngleAxisd(psi, Vec3::UnitY()).toRotationMatrix();
  const Vec3 c(0.5 * o.length, 0.0, o.radius);
  per.R = {R, Mat3::Identity()};
  per.t0 = {c - R * c, Vec3(0, o.width, 0)};

  // start on the exact arc, fibers along the radius
  MatX3 x0(model.num_nodes(), 3);
  for (int i = 0; i < model.num_nodes(); ++i) {
    const Vec3 X = model.X.row(i);
    const double a = (X.x() - 0.5 * o.length) / o.radius;
    x0.row(i) = (c + (o.radius - X.z()) * Vec3(std::sin(a), 0.0, -std::cos(a))).transpose();
    x0(i, 1) = X.y();
  }
  const int pin = nx / 2;  // bottom node under (L/2, 0)
  EquilibriumProblem prob = make_problem(model, per, {{pin, 0}, {pin, 1}, {pin, 2}}, x0, o.newton);
  const Solution sol = static_solve(prob, prob.dofs.restrict(x0, MatX3::Zero(model.num_nodes(), 3), VecX()));

  BenchShellRow row;
  row.resolution = nx;
  row.dofs = prob.dofs.num_free();
  row.energy = sol.energy;
  row.reference = kirchhoff_bending_energy(o.length * o.width, o.young, o.poisson, o.h, o.radius);
  row.rel_gap = (row.energy - row.reference) / row.reference;
  row.iterations = sol.report.iterations;
  return row;
}

std::vector<BenchShellRow> bench_shell_sweep(const BenchShellOptions& opts) {
  std::vector<BenchShellRow> rows;
  for (int nx : opts.resolutions) rows.push_back(bench_shell_run(opts, nx));
  return rows;
}

}  // namespace stripeforge::sim
