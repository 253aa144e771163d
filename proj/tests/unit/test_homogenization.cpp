#include <doctest.h>

#include <stripeforge/error.hpp>
#include <stripeforge/homogenization.hpp>

#include "../common/conforming.hpp"
#include "test_helpers.hpp"

using namespace stripeforge;
using namespace stripeforge::sim;

namespace {

const std::array<Vec3, 2> kUnit{Vec3(1, 0, 0), Vec3(0, 1, 0)};

VecX band_level_set(const mesh::TriMesh& m) {
  VecX phi(m.num_vertices());
  for (int i = 0; i < m.num_vertices(); ++i) phi[i] = 1.0 / 6.0 - std::abs(m.vertex(i).x() - 0.5);  // band [1/3, 2/3]
  return phi;
}

struct XfemVsConforming {
  HomogenizationResult xfem;
  MatX3 mid;  // xfem mid-surface
  double conforming = 0.0;
  double gap() const { return std::abs(xfem.energy - conforming) / conforming; }
};

XfemVsConforming cell_energies(const mesh::TriMesh& grid, const VecX& phi, double ratio) {
  const fem::Material soft = fem::from_young_poisson(1.0, 0.3), stiff = fem::from_young_poisson(ratio, 0.3);
  HomogenizationOptions o;
  o.newton.tol = 1e-10;
  MacroState st;
  st.stretch = 1.01;
  st.h = 0.02;

  fem::ShellModel xm = fem::extrude_shell(grid, st.h, mesh::vertex_normals(grid), soft, stiff);
  fem::set_level_set(xm, phi);
  XfemVsConforming r;
  r.xfem = homogenize(xm, mesh::build_periodic_map(grid, kUnit, 1e-9), st, o);
  r.mid = fem::mid_surface(xm, r.xfem.x);

  const testutil::ConformingCell cc = testutil::conforming_from_cut(grid, phi);
  fem::ShellModel cm = fem::extrude_shell(cc.mesh, st.h, mesh::vertex_normals(cc.mesh), soft, stiff);
  fem::set_element_materials(cm, cc.sign);
  r.conforming = homogenize(cm, mesh::build_periodic_map(cc.mesh, kUnit, 1e-9), st, o).energy;
  return r;
}

}  // namespace

TEST_SUITE("homogenization") {
  TEST_CASE("macro boundary conditions") {
    const mesh::TriMesh m = mesh::make_grid(2, 2);
    const auto map = mesh::build_periodic_map(m, kUnit, 1e-9);
    MacroState st;
    st.stretch = 1.05;
    const Periodicity p0 = macro_boundary_conditions(st, map);
    CHECK((p0.t0[0] - Vec3(1.05, 0, 0)).norm() <= 1e-15);
    CHECK((p0.t0[1] - Vec3(0, 1, 0)).norm() <= 1e-15);
    CHECK(p0.num_free() == 2);
    st.theta = kPi / 2;
    const Periodicity p1 = macro_boundary_conditions(st, map);
    CHECK((p1.t0[0] - Vec3(1, 0, 0)).norm() <= 1e-15);
    CHECK((p1.t0[1] - Vec3(0, 1.05, 0)).norm() <= 1e-15);
  }

  TEST_CASE("doubling h at fixed areal energy halves the modulus") {
    const double e1 = young_modulus(1e-4, MacroState{0.3, 1.01, 1.0, 0.01});
    const double e2 = young_modulus(1e-4, MacroState{0.3, 1.01, 1.0, 0.02});
    CHECK(e1 == doctest::Approx(2.0 * e2).epsilon(1e-15));
    CHECK_THROWS_AS(young_modulus(1.0, MacroState{0.0, 1.01, 1.0, 0.01}, false), ValidationError);
  }

  TEST_CASE("striped cell lies between the Reuss and Voigt bounds") {
    const mesh::TriMesh m = mesh::make_grid(10, 10);
    const double Es = 10.0, Em = 1.0, nu = 0.3;
    fem::ShellModel model =
        fem::extrude_shell(m, 0.02, mesh::vertex_normals(m), fem::from_young_poisson(Em, nu), fem::from_young_poisson(Es, nu));
    fem::set_level_set(model, band_level_set(m));
    const auto map = mesh::build_periodic_map(m, kUnit, 1e-9);
    const double f = 1.0 / 3.0;
    const double voigt = f * Es + (1 - f) * Em, reuss = 1.0 / (f / Es + (1 - f) / Em);
    const auto prof = stiffness_profile(model, map, {0.0, kPi / 4, kPi / 2}, 0.01, HomogenizationOptions{});
    for (const auto& r : prof) {
      MESSAGE("theta " << r.state.theta << " k " << r.young << " reuss " << reuss << " voigt " << voigt);
      CHECK(r.young >= reuss);
      CHECK(r.young <= voigt);
    }
    CHECK(prof[2].young > prof[0].young);
  }

  TEST_CASE("stiff band under stretch kinks at the interface") {
    const mesh::TriMesh grid = mesh::make_grid(8, 8);
    const XfemVsConforming r = cell_energies(grid, band_level_set(grid), 1000.0);
    MESSAGE("xfem " << r.xfem.energy << " conforming " << r.conforming);
    CHECK(r.xfem.xhat.cwiseAbs().maxCoeff() > 1e-6);
    CHECK(r.gap() <= 0.02);
    // bottom row: vertex i sits at x = i/8; band covers [1/3, 2/3]
    const MatX3& mid = r.mid;
    const double soft = (mid(2, 0) - mid(0, 0)) / 0.25 - 1.0;
    const double stiff = (mid(5, 0) - mid(3, 0)) / 0.25 - 1.0;
    MESSAGE("soft strain " << soft << " stiff strain " << stiff);
    CHECK(soft > 10.0 * stiff);
  }

  TEST_CASE("enrichment gap to a conforming mesh shrinks under refinement") {
    const mesh::TriMesh g8 = mesh::make_grid(8, 8), g16 = mesh::make_grid(16, 16);
    const XfemVsConforming coarse = cell_energies(g8, testutil::disk_level_set(g8, 0.3), 10.0);
    const XfemVsConforming fine = cell_energies(g16, testutil::disk_level_set(g16, 0.3), 10.0);
    MESSAGE("gap coarse " << coarse.gap() << " fine " << fine.gap());
    CHECK(coarse.gap() <= 0.02);
    CHECK(fine.gap() < coarse.gap());
  }

  TEST_CASE("refined cut quadrature leaves the energy unchanged") {
    const mesh::TriMesh grid = mesh::make_grid(8, 8);
    fem::ShellModel model = fem::extrude_shell(grid, 0.02, mesh::vertex_normals(grid), fem::from_young_poisson(1.0, 0.3),
                                               fem::from_young_poisson(1000.0, 0.3));
    fem::set_level_set(model, band_level_set(grid));
    const auto map = mesh::build_periodic_map(grid, kUnit, 1e-9);
    MacroState st;
    st.h = 0.02;
    HomogenizationOptions o;
    o.newton.tol = 1e-10;
    const auto r = homogenize(model, map, st, o);
    CHECK(r.xhat.cwiseAbs().maxCoeff() > 1e-6);
    fem::ShellModel refined = model;
    refined.plan_cut = fem::refined_plan();
    const double U0 = assemble_energy_full(model, r.x, r.xhat, nullptr);
    const double U1 = assemble_energy_full(refined, r.x, r.xhat, nullptr);
    MESSAGE("default " << U0 << " refined " << U1);
    CHECK(testutil::rel_err(U0, U1) < 1e-6);
  }

  TEST_CASE("stiff disk plate buckles out of plane") {
    // compressing the cell along x: the thin soft matrix leaves the flat branch
    const mesh::TriMesh grid = mesh::make_grid(10, 10);
    const double h = 0.01;
    fem::ShellModel model = fem::extrude_shell(grid, h, mesh::vertex_normals(grid), fem::from_young_poisson(1.0, 0.3),
                                               fem::from_young_poisson(100.0, 0.3));
    fem::set_level_set(model, testutil::disk_level_set(grid, 0.3));
    const auto map = mesh::build_periodic_map(grid, kUnit, 1e-9);
    MacroState st;
    st.stretch = 0.97;
    st.h = h;
    const auto r = homogenize(model, map, st, HomogenizationOptions{});
    CHECK(r.solution.report.converged);
    const MatX3 mid = fem::mid_surface(model, r.x);
    const double w = mid.col(2).maxCoeff() - mid.col(2).minCoeff();
    MESSAGE("out-of-plane range " << w << " h " << h);
    CHECK(w > 0.1 * h);
  }
}
