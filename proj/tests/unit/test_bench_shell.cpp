#include <doctest.h>

#include <stripeforge/bench_shell.hpp>
#include <stripeforge/error.hpp>

#include <cmath>

using namespace stripeforge;
using namespace stripeforge::sim;

TEST_SUITE("bench_shell") {
  TEST_CASE("plate bending reference") {
    // A E h^3 / (24 (1 - nu^2) r^2)
    const double ref = 0.07 * 0.07 * 1e6 * std::pow(0.6e-3, 3) / (24.0 * 0.01);
    CHECK(kirchhoff_bending_energy(0.07 * 0.07, 1e6, 0.0, 0.6e-3, 0.1) == doctest::Approx(ref).epsilon(1e-14));
    CHECK(kirchhoff_bending_energy(0.07 * 0.07, 1e6, 0.3, 0.6e-3, 0.1) == doctest::Approx(ref / 0.91).epsilon(1e-14));
    CHECK(ref == doctest::Approx(4.41e-6).epsilon(1e-12));
  }

  TEST_CASE("energy approaches the plate value from above") {
    BenchShellOptions o;
    o.resolutions = {32, 64, 128, 256, 512, 1024};
    const auto rows = bench_shell_sweep(o);
    REQUIRE(rows.size() == 6);
    for (size_t i = 0; i < rows.size(); ++i) {
      MESSAGE(rows[i].resolution << " dofs " << rows[i].dofs << " gap " << rows[i].rel_gap);
      CHECK(rows[i].energy > rows[i].reference);
      if (i > 0) CHECK(rows[i].energy < rows[i - 1].energy);
    }
    CHECK(rows.back().dofs <= 20000);
    CHECK(std::abs(rows.back().rel_gap) <= 0.05);
  }

  TEST_CASE("odd resolution is rejected") {
    CHECK_THROWS_AS(bench_shell_run(BenchShellOptions{}, 33), ValidationError);
  }
}
