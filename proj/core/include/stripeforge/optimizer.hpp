#pragma once

#include "stripeforge/design.hpp"

#include <functional>
#include <memory>
#include <string>
#include <vector>

namespace stripeforge::opt {

/// Values recorded for one evaluated point.
struct MeritValue {
  double merit = 0.0;
  double objective = 0.0;
  double r_sing = 0.0;
  double r_smooth = 0.0;
  double lambda = 0.0;
};

/// Minimization target over a flat parameter vector. `evaluate` returns false
/// for a rejected candidate; `gradient` refers to the last successful
/// evaluation; `accept` marks it as the new base point.
class MeritProblem {
 public:
  virtual ~MeritProblem() = default;
  virtual int dim() const = 0;
  virtual bool evaluate(const VecX& x, MeritValue& out) = 0;
  virtual VecX gradient() = 0;
  virtual void accept() {}
  virtual std::string last_error() const { return {}; }
};

/// 1/2 (x - x*)^T Q (x - x*) with Q = diag(scales); the test hook that
/// bypasses simulation.
class QuadraticSurrogate : public MeritProblem {
 public:
  QuadraticSurrogate(VecX minimizer, VecX scales);
  int dim() const override { return static_cast<int>(xstar_.size()); }
  bool evaluate(const VecX& x, MeritValue& out) override;
  VecX gradient() override;

 private:
  VecX xstar_, q_, last_;
};

/// Design parameters x = (p, theta). Candidates are warm-started from the
/// last accepted evaluation. With `optimize_theta` off theta is held fixed and
/// dim() excludes it.
class DesignMerit : public MeritProblem {
 public:
  DesignMerit(const inverse::DesignProblem& problem, double theta0, bool optimize_theta = true);
  int dim() const override;
  bool evaluate(const VecX& x, MeritValue& out) override;
  VecX gradient() override;
  void accept() override;
  std::string last_error() const override { return error_; }

  VecX pack(const VecX& p, double theta) const;
  void unpack(const VecX& x, VecX& p, double& theta) const;
  const inverse::Evaluation* accepted() const { return base_.get(); }
  const inverse::Evaluation* last() const { return last_.get(); }
  const inverse::SolveCounter& last_solves() const { return solves_; }

 private:
  const inverse::DesignProblem* problem_;
  double theta_fixed_;
  bool optimize_theta_;
  std::shared_ptr<inverse::Evaluation> base_, last_;
  inverse::SolveCounter solves_;
  std::string error_;
};

enum class Method { kLbfgs, kSteepestDescent };

struct IterRecord;

struct OptOptions {
  Method method = Method::kLbfgs;
  int memory = 10;
  int max_iterations = 100;
  double armijo = 1e-4;
  int max_backtracks = 30;
  double initial_step = 0.1;     // first trial step length in parameter space
  double grad_tol = 1e-8;        // relative to the initial gradient norm
  double stagnation_tol = 1e-10; // relative merit change
  int stagnation_window = 5;
  std::function<void(const IterRecord&)> on_iteration;  // called for every history entry
};

struct IterRecord {
  int iter = 0;
  MeritValue value;
  double grad_norm = 0.0;
  double step = 0.0;
};

struct OptRun {
  std::vector<IterRecord> history;  // entry 0 is the start point
  VecX x;
  std::string status;  // converged | stagnated | max_iterations | line_search_failed
};

/// Descent with backtracking Armijo line search. Throws SolverError if the
/// start point cannot be evaluated.
OptRun minimize(MeritProblem& problem, const VecX& x0, const OptOptions& opts);

struct ProbeResult {
  int coordinate = 0;
  double adjoint = 0.0;
  double fd = 0.0;
  double rel_err = 0.0;
  bool pass = false;
};

struct GradientCheckReport {
  std::vector<ProbeResult> probes;
  double max_rel_err = 0.0;
  bool pass = true;
};

/// Central differences on `n_probes` distinct random coordinates (seeded).
/// Errors are measured relative to max(|adjoint|, |fd|, floor * |g|_inf).
GradientCheckReport gradient_check(MeritProblem& problem, const VecX& x, int n_probes, double tol, double step,
                                   std::uint64_t seed, double floor = 1e-3);

/// |adjoint - fd| for one coordinate over a range of steps.
std::vector<std::pair<double, double>> fd_step_sweep(MeritProblem& problem, const VecX& x, int coordinate,
                                                     const std::vector<double>& steps);

}  // namespace stripeforge::opt
