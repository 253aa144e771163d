#include <benchmark/benchmark.h>

#include <stripeforge/design.hpp>
#include <stripeforge/element.hpp>
#include <stripeforge/homogenization.hpp>

#include <random>

using namespace stripeforge;

namespace {

const std::array<Vec3, 2> kUnit{Vec3(1, 0, 0), Vec3(0, 1, 0)};

VecX noise(int n, double base, double amp, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> U(-amp, amp);
  VecX p(n);
  for (int i = 0; i < n; ++i) p[i] = base + U(rng);
  return p;
}

void BM_StripeEigenplane(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const mesh::TriMesh m = mesh::make_grid(n, n);
  const MatX3 z = stripes::field_from_params(noise(m.num_vertices(), 0.2, 0.3, 1), 4 * kPi, mesh::tangent_frames(m));
  const auto M = stripes::assemble_stripe_matrices(m, stripes::edge_omega(m, z), mesh::cotan_edge_weights(m));
  for (auto _ : state) benchmark::DoNotOptimize(stripes::solve_eigenplane(M).lambda);
  state.counters["vertices"] = m.num_vertices();
}
BENCHMARK(BM_StripeEigenplane)->Arg(10)->Arg(20)->Arg(40)->Unit(benchmark::kMillisecond);

void BM_CutElementHessian(benchmark::State& state) {
  fem::Mat63 X;
  X << 0, 0, 0, 1, 0, 0, 0, 1, 0, 0, 0, 0.2, 1, 0, 0.2, 0, 1, 0.2;
  fem::Mat63 x = X * 1.01, xh = fem::Mat63::Constant(0.01);
  const fem::Material soft{1.0, 2.0}, stiff{30.0, 40.0};
  const fem::QuadraturePlan plan = fem::cut_plan();
  for (auto _ : state)
    benchmark::DoNotOptimize(
        fem::cut_element(X, x, xh, Vec3(0.4, -0.3, -0.5), soft, stiff, plan, fem::EvalMode::kHessian).energy);
}
BENCHMARK(BM_CutElementHessian);

void BM_UncutElementHessian(benchmark::State& state) {
  fem::Mat63 X;
  X << 0, 0, 0, 1, 0, 0, 0, 1, 0, 0, 0, 0.2, 1, 0, 0.2, 0, 1, 0.2;
  const fem::Mat63 x = X * 1.01;
  const fem::Material stiff{30.0, 40.0};
  const fem::QuadraturePlan plan = fem::default_plan();
  for (auto _ : state)
    benchmark::DoNotOptimize(fem::uncut_element(X, x, stiff, plan, fem::EvalMode::kHessian).energy);
}
BENCHMARK(BM_UncutElementHessian);

void BM_Homogenize(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const mesh::TriMesh m = mesh::make_grid(n, n);
  fem::ShellModel model = fem::extrude_shell(m, 0.02, mesh::vertex_normals(m), fem::from_young_poisson(1.0, 0.3),
                                             fem::from_young_poisson(10.0, 0.3));
  VecX phi(m.num_vertices());
  for (int i = 0; i < m.num_vertices(); ++i) phi[i] = 0.3 - std::hypot(m.vertex(i).x() - 0.5, m.vertex(i).y() - 0.5);
  fem::set_level_set(model, phi);
  const auto map = mesh::build_periodic_map(m, kUnit, 1e-9);
  sim::MacroState st;
  st.h = 0.02;
  for (auto _ : state) benchmark::DoNotOptimize(sim::homogenize(model, map, st, sim::HomogenizationOptions{}).energy);
}
BENCHMARK(BM_Homogenize)->Arg(8)->Arg(16)->Unit(benchmark::kMillisecond);

void BM_DesignGradient(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  inverse::DesignSetup s{mesh::make_grid(n, n)};
  s.frequency = 4 * kPi;
  s.h = 0.02;
  s.soft = fem::from_young_poisson(1.0, 0.3);
  s.stiff = fem::from_young_poisson(10.0, 0.3);
  s.objective.angles = {0.0, kPi / 4, kPi / 2, 3 * kPi / 4};
  s.objective.targets = {3.0, 3.0, 3.0, 3.0};
  s.objective.w_sm = 1e-3;
  const VecX p0 = noise(n * n, 0.2, 0.15, 3);
  const inverse::DesignProblem prob(s, p0);
  for (auto _ : state) {
    const inverse::Evaluation ev = prob.evaluate(p0, 0.3);
    benchmark::DoNotOptimize(prob.gradient(ev).dp.norm());
  }
}
BENCHMARK(BM_DesignGradient)->Arg(8)->Arg(12)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
