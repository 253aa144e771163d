#include <doctest.h>

#include <stripeforge/error.hpp>
#include <stripeforge/optimizer.hpp>

#include <random>

#include "test_helpers.hpp"

using namespace stripeforge;
using namespace stripeforge::opt;

namespace {

inverse::DesignSetup small_cell(int n) {
  inverse::DesignSetup s{mesh::make_grid(n, n)};
  s.frequency = 2.0 * kPi * 2.0;
  s.h = 0.02;
  s.soft = fem::from_young_poisson(1.0, 0.3);
  s.stiff = fem::from_young_poisson(10.0, 0.3);
  s.objective.kind = inverse::ObjectiveKind::kStiffnessProfile;
  s.objective.angles = {0.0, kPi / 2};
  s.objective.targets = {3.0, 3.0};
  s.objective.w_sing = 1.0;
  s.objective.w_sm = 1e-3;
  s.homogenization.newton.tol = 1e-10;
  return s;
}

VecX noisy(int n, double base, double amp, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> U(-amp, amp);
  VecX p(n);
  for (Index i = 0; i < n; ++i) p[i] = base + U(rng);
  return p;
}

}  // namespace

TEST_SUITE("optimizer") {
  TEST_CASE("quadratic surrogate reaches its minimizer") {
    const int n = 10;
    VecX xstar = noisy(n, 0.0, 2.0, 1), q(n);
    for (int i = 0; i < n; ++i) q[i] = std::pow(10.0, static_cast<double>(i) / (n - 1));  // condition 10
    QuadraticSurrogate f(xstar, q);
    const OptRun run = minimize(f, VecX::Zero(n), OptOptions{});
    MESSAGE("status " << run.status << " iterations " << run.history.size() - 1);
    CHECK(run.history.size() - 1 < 30);
    CHECK((run.x - xstar).norm() <= 1e-6 * xstar.norm());
    for (size_t i = 1; i < run.history.size(); ++i) CHECK(run.history[i].value.merit < run.history[i - 1].value.merit);
  }

  TEST_CASE("steepest descent also makes progress on the surrogate") {
    QuadraticSurrogate f(VecX::Constant(5, 1.0), VecX::Constant(5, 2.0));
    OptOptions o;
    o.method = Method::kSteepestDescent;
    const OptRun run = minimize(f, VecX::Zero(5), o);
    CHECK(run.history.back().value.merit < 1e-10 * run.history.front().value.merit);
  }

  TEST_CASE("gradient check on the surrogate") {
    const int n = 12;
    QuadraticSurrogate f(noisy(n, 0.0, 1.0, 2), noisy(n, 2.0, 1.0, 3));
    const GradientCheckReport rep = gradient_check(f, noisy(n, 0.0, 1.0, 4), 8, 1e-10, 1e-3, 7);
    MESSAGE("max rel err " << rep.max_rel_err);
    CHECK(rep.probes.size() == 8);
    CHECK(rep.max_rel_err <= 1e-10);
    CHECK(rep.pass);
  }

  TEST_CASE("start point failure is reported") {
    struct Broken : MeritProblem {
      int dim() const override { return 2; }
      bool evaluate(const VecX&, MeritValue&) override { return false; }
      VecX gradient() override { return VecX::Zero(2); }
    } b;
    CHECK_THROWS_AS(minimize(b, VecX::Zero(2), OptOptions{}), SolverError);
  }

  TEST_CASE("smoothing-only run removes noise") {
    inverse::DesignSetup s = small_cell(8);
    s.objective.weight = 0.0;
    s.objective.w_sing = 0.0;
    s.objective.w_sm = 1.0;
    const VecX p0 = noisy(64, 0.3, 1.0, 5);
    const inverse::DesignProblem prob(s, p0);
    DesignMerit merit(prob, 0.0, false);
    OptOptions o;
    o.max_iterations = 300;
    o.stagnation_tol = 0.0;
    const OptRun run = minimize(merit, p0, o);
    const double g0 = run.history.front().grad_norm, g1 = run.history.back().grad_norm;
    MESSAGE("status " << run.status << " iters " << run.history.size() - 1 << " |g| " << g0 << " -> " << g1
                      << " R_sm " << run.history.front().value.r_smooth << " -> " << run.history.back().value.r_smooth);
    CHECK(g1 * 100.0 <= g0);
    for (size_t i = 1; i < run.history.size(); ++i)
      CHECK(run.history[i].value.r_smooth < run.history[i - 1].value.r_smooth);
  }

  TEST_CASE("candidate evaluation is repeatable and 2pi periodic in theta") {
    const inverse::DesignSetup s = small_cell(8);
    const VecX p0 = noisy(64, 0.2, 0.15, 6);
    const inverse::DesignProblem prob(s, p0);
    DesignMerit merit(prob, 0.0);
    const double theta = 0.4;
    MeritValue a, b, c;
    REQUIRE(merit.evaluate(merit.pack(p0, theta), a));
    merit.accept();
    REQUIRE(merit.evaluate(merit.pack(p0, theta), b));
    REQUIRE(merit.evaluate(merit.pack(p0, theta + 2.0 * kPi), c));
    MESSAGE("merit " << a.merit << " repeat " << b.merit << " shifted " << c.merit);
    CHECK(testutil::rel_err(a.merit, b.merit) <= 1e-10);
    CHECK(testutil::rel_err(a.merit, c.merit) <= 1e-10);
  }

  TEST_CASE("first-order Taylor ratio") {
    const inverse::DesignSetup s = small_cell(8);
    const VecX p0 = noisy(64, 0.2, 0.15, 6);
    const inverse::DesignProblem prob(s, p0);
    DesignMerit merit(prob, 0.0);
    const VecX x0 = merit.pack(p0, 0.4);
    MeritValue v0, v1;
    REQUIRE(merit.evaluate(x0, v0));
    merit.accept();
    const VecX g = merit.gradient();
    const VecX dir = noisy(merit.dim(), 0.0, 1.0, 8).normalized();
    const double delta = 1e-6;
    REQUIRE(merit.evaluate(x0 + delta * dir, v1));
    const double ratio = (v1.merit - v0.merit) / (delta * g.dot(dir));
    MESSAGE("ratio " << ratio << " predicted " << delta * g.dot(dir));
    CHECK(ratio >= 0.9);
    CHECK(ratio <= 1.1);
  }

  TEST_CASE("identical runs give bit-identical histories") {
    const inverse::DesignSetup s = small_cell(6);
    const VecX p0 = noisy(36, 0.2, 0.15, 9);
    const inverse::DesignProblem prob(s, p0);
    OptOptions o;
    o.max_iterations = 3;
    auto once = [&] {
      DesignMerit merit(prob, 0.0);
      return minimize(merit, merit.pack(p0, 0.0), o);
    };
    const OptRun a = once(), b = once();
    REQUIRE(a.history.size() == b.history.size());
    for (size_t i = 0; i < a.history.size(); ++i) {
      CHECK(a.history[i].value.merit == b.history[i].value.merit);
      CHECK(a.history[i].grad_norm == b.history[i].grad_norm);
      CHECK(a.history[i].step == b.history[i].step);
    }
    CHECK(a.x == b.x);
  }

  TEST_CASE("freezing theta gives up descent") {
    const inverse::DesignSetup s = small_cell(6);
    const VecX p0 = noisy(36, 0.2, 0.15, 9);
    const inverse::DesignProblem prob(s, p0);
    OptOptions o;
    o.max_iterations = 3;
    // theta = 0.5 sits on a steep flank of the merit along theta
    DesignMerit joint(prob, 0.5), frozen(prob, 0.5, false);
    const OptRun a = minimize(joint, joint.pack(p0, 0.5), o);
    const OptRun b = minimize(frozen, frozen.pack(p0, 0.5), o);
    MESSAGE("joint " << a.history.back().value.merit << " frozen " << b.history.back().value.merit << " theta* "
                     << a.x[a.x.size() - 1]);
    CHECK(a.x[a.x.size() - 1] != 0.5);
    CHECK(a.history.back().value.merit < b.history.back().value.merit);
  }

  TEST_CASE("warm starts agree with cold solves") {
    const inverse::DesignSetup s = small_cell(6);
    const VecX p0 = noisy(36, 0.2, 0.15, 9);
    const inverse::DesignProblem prob(s, p0);
    DesignMerit merit(prob, 0.0);
    OptOptions o;
    o.max_iterations = 3;
    const OptRun run = minimize(merit, merit.pack(p0, 0.0), o);
    REQUIRE(run.history.size() == 4);
    const inverse::Evaluation* warm = merit.accepted();
    VecX p;
    double theta;
    merit.unpack(run.x, p, theta);
    const inverse::Evaluation cold = prob.evaluate(p, theta);
    MESSAGE("warm " << warm->merit << " cold " << cold.merit);
    CHECK(testutil::rel_err(warm->merit, cold.merit) <= 1e-8);
    for (size_t i = 0; i < cold.states.size(); ++i)
      CHECK(testutil::rel_err(warm->states[i].energy, cold.states[i].energy) <= 1e-8);
  }
}
