#include "stripeforge/optimizer.hpp"

#include "stripeforge/error.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <random>

namespace stripeforge::opt {

QuadraticSurrogate::QuadraticSurrogate(VecX minimizer, VecX scales) : xstar_(std::move(minimizer)), q_(std::move(scales)) {
  if (xstar_.size() != q_.size()) throw ValidationError("surrogate sizes differ");
}

bool QuadraticSurrogate::evaluate(const VecX& x, MeritValue& out) {
  last_ = x;
  const VecX d = x - xstar_;
  out = MeritValue{};
  out.merit = out.objective = 0.5 * d.dot(q_.cwiseProduct(d));
  return true;
}

VecX QuadraticSurrogate::gradient() { return q_.cwiseProduct(last_ - xstar_); }

DesignMerit::DesignMerit(const inverse::DesignProblem& problem, double theta0, bool optimize_theta)
    : problem_(&problem), theta_fixed_(theta0), optimize_theta_(optimize_theta) {}

int DesignMerit::dim() const { return problem_->num_params() + (optimize_theta_ ? 1 : 0); }

VecX DesignMerit::pack(const VecX& p, double theta) const {
  VecX x(dim());
  x.head(p.size()) = p;
  if (optimize_theta_) x[p.size()] = theta;
  return x;
}

void DesignMerit::unpack(const VecX& x, VecX& p, double& theta) const {
  if (x.size() != dim()) throw ValidationError("design vector has the wrong size");
  p = x.head(problem_->num_params());
  theta = optimize_theta_ ? x[problem_->num_params()] : theta_fixed_;
}

bool DesignMerit::evaluate(const VecX& x, MeritValue& out) {
  VecX p;
  double theta;
  unpack(x, p, theta);
  try {
    last_ = std::make_shared<inverse::Evaluation>(problem_->evaluate(p, theta, base_.get()));
  } catch (const RepinRequired&) {
    throw;
  } catch (const SolverError& e) {
    error_ = e.what();
    return false;
  }
  out.merit = last_->merit;
  out.objective = last_->objective;
  out.r_sing = last_->r_sing;
  out.r_smooth = last_->r_smooth;
  out.lambda = last_->eigen.lambda;
  return true;
}

VecX DesignMerit::gradient() {
  if (!last_) throw ValidationError("gradient requested before any evaluation");
  const inverse::DesignGradient g = problem_->gradient(*last_);
  solves_ = g.solves;
  VecX out(dim());
  out.head(g.dp.size()) = g.dp;
  if (optimize_theta_) out[g.dp.size()] = g.dtheta;
  return out;
}

void DesignMerit::accept() { base_ = last_; }

namespace {

VecX two_loop(const VecX& g, const std::deque<VecX>& S, const std::deque<VecX>& Y) {
  const int m = static_cast<int>(S.size());
  VecX q = g;
  std::vector<double> alpha(m), rho(m);
  for (int i = m - 1; i >= 0; --i) {
    rho[i] = 1.0 / Y[i].dot(S[i]);
    alpha[i] = rho[i] * S[i].dot(q);
    q -= alpha[i] * Y[i];
  }
  const double gamma = S.back().dot(Y.back()) / Y.back().squaredNorm();
  VecX r = gamma * q;
  for (int i = 0; i < m; ++i) {
    const double beta = rho[i] * Y[i].dot(r);
    r += (alpha[i] - beta) * S[i];
  }
  return -r;
}

}  // namespace

OptRun minimize(MeritProblem& problem, const VecX& x0, const OptOptions& opts) {
  if (x0.size() != problem.dim()) throw ValidationError("start point has the wrong size");
  OptRun run;
  VecX x = x0;
  MeritValue v;
  if (!problem.evaluate(x, v)) throw SolverError("start point evaluation failed: " + problem.last_error());
  problem.accept();
  VecX g = problem.gradient();
  const double g0 = g.norm();
  run.history.push_back({0, v, g0, 0.0});
  if (opts.on_iteration) opts.on_iteration(run.history.back());

  std::deque<VecX> S, Y;
  double last_step = opts.initial_step;
  run.status = "max_iterations";
  for (int it = 1; it <= opts.max_iterations; ++it) {
    if (g.norm() <= opts.grad_tol * std::max(g0, 1e-300) || g.norm() == 0.0) {
      run.status = "converged";
      break;
    }
    VecX d;
    if (opts.method == Method::kLbfgs && !S.empty()) {
      d = two_loop(g, S, Y);
    } else {
      d = -g;
    }
    double slope = g.dot(d);
    if (!(slope < 0.0) || !d.allFinite()) {
      S.clear();
      Y.clear();
      d = -g;
      slope = -g.squaredNorm();
    }
    double t;
    if (opts.method == Method::kLbfgs && !S.empty()) {
      t = 1.0;
    } else if (opts.method == Method::kLbfgs) {
      t = opts.initial_step / d.norm();
    } else {
      t = 2.0 * last_step / d.norm();
    }

    bool accepted = false;
    VecX xn;
    MeritValue vn;
    for (int k = 0; k <= opts.max_backtracks; ++k, t *= 0.5) {
      xn = x + t * d;
      if (problem.evaluate(xn, vn) && vn.merit <= v.merit + opts.armijo * t * slope && vn.merit < v.merit) {
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      run.status = "line_search_failed";
      break;
    }
    problem.accept();
    const VecX gn = problem.gradient();
    const VecX s = xn - x, yv = gn - g;
    if (s.dot(yv) > 1e-12 * s.norm() * yv.norm()) {
      S.push_back(s);
      Y.push_back(yv);
      if (static_cast<int>(S.size()) > opts.memory) {
        S.pop_front();
        Y.pop_front();
      }
    }
    last_step = s.norm();
    x = xn;
    v = vn;
    g = gn;
    run.history.push_back({it, v, g.norm(), last_step});
    if (opts.on_iteration) opts.on_iteration(run.history.back());

    const int w = opts.stagnation_window;
    if (it >= w) {
      const double old = run.history[run.history.size() - 1 - w].value.merit;
      if (std::abs(old - v.merit) <= opts.stagnation_tol * std::max(1.0, std::abs(v.merit))) {
        run.status = "stagnated";
        break;
      }
    }
  }
  run.x = x;
  return run;
}

GradientCheckReport gradient_check(MeritProblem& problem, const VecX& x, int n_probes, double tol, double step,
                                   std::uint64_t seed, double floor) {
  MeritValue v;
  if (!problem.evaluate(x, v)) throw SolverError("gradient check point evaluation failed: " + problem.last_error());
  problem.accept();
  const VecX g = problem.gradient();
  const double gmax = g.cwiseAbs().maxCoeff();

  std::vector<int> coords(problem.dim());
  for (int i = 0; i < problem.dim(); ++i) coords[i] = i;
  std::mt19937_64 rng(seed);
  std::shuffle(coords.begin(), coords.end(), rng);
  coords.resize(std::min<size_t>(coords.size(), static_cast<size_t>(std::max(n_probes, 0))));

  GradientCheckReport rep;
  for (int c : coords) {
    VecX xp = x, xm = x;
    xp[c] += step;
    xm[c] -= step;
    MeritValue vp, vm;
    ProbeResult r;
    r.coordinate = c;
    r.adjoint = g[c];
    if (problem.evaluate(xp, vp) && problem.evaluate(xm, vm)) {
      r.fd = (vp.merit - vm.merit) / (2.0 * step);
      r.rel_err = std::abs(r.adjoint - r.fd) / std::max({std::abs(r.adjoint), std::abs(r.fd), floor * gmax, 1e-300});
    } else {
      r.fd = std::numeric_limits<double>::quiet_NaN();
      r.rel_err = std::numeric_limits<double>::infinity();
    }
    r.pass = r.rel_err <= tol;
    rep.pass = rep.pass && r.pass;
    rep.max_rel_err = std::max(rep.max_rel_err, r.rel_err);
    rep.probes.push_back(r);
  }
  return rep;
}

std::vector<std::pair<double, double>> fd_step_sweep(MeritProblem& problem, const VecX& x, int coordinate,
                                                     const std::vector<double>& steps) {
  MeritValue v;
  if (!problem.evaluate(x, v)) throw SolverError("sweep point evaluation failed: " + problem.last_error());
  problem.accept();
  const double a = problem.gradient()[coordinate];
  std::vector<std::pair<double, double>> out;
  for (double h : steps) {
    VecX xp = x, xm = x;
    xp[coordinate] += h;
    xm[coordinate] -= h;
    MeritValue vp, vm;
    if (!problem.evaluate(xp, vp) || !problem.evaluate(xm, vm)) {
      out.emplace_back(h, std::numeric_limits<double>::infinity());
      continue;
    }
    out.emplace_back(h, std::abs(a - (vp.merit - vm.merit) / (2.0 * h)));
  }
  return out;
}

}  // namespace stripeforge::opt
