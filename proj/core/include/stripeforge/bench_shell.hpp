#pragma once

#include "stripeforge/equilibrium.hpp"

#include <vector>

namespace stripeforge::sim {

/// Homogeneous square plate bent to a cylinder by rotational periodicity
/// along x (axis parallel to y through the centre of curvature) and plain
/// translation along y.
struct BenchShellOptions {
  double radius = 0.1;
  double h = 0.6e-3;
  double length = 0.07;  // x
  double width = 0.07;   // y
  double young = 1e6;
  double poisson = 0.0;
  int ny = 2;  // the bent state is invariant along y
  std::vector<int> resolutions{32, 64, 128, 256, 512, 1024};
  NewtonOptions newton;
};

struct BenchShellRow {
  int resolution = 0;  // elements along x
  int dofs = 0;
  double energy = 0.0;
  double reference = 0.0;  // thin-plate energy
  double rel_gap = 0.0;    // (energy - reference) / reference
  int iterations = 0;
};

/// A E h^3 / (24 (1 - nu^2) r^2).
double kirchhoff_bending_energy(double area, double young, double poisson, double h, double radius);

/// One resolution. Throws SolverError if Newton fails.
BenchShellRow bench_shell_run(const BenchShellOptions& opts, int nx);

/// All resolutions in order.
std::vector<BenchShellRow> bench_shell_sweep(const BenchShellOptions& opts);

}  // namespace stripeforge::sim
