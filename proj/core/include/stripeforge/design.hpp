#pragma once

#include "stripeforge/homogenization.hpp"
#include "stripeforge/objectives.hpp"
#include "stripeforge/sensitivity.hpp"
#include "stripeforge/shell_model.hpp"

#include <memory>
#include <optional>
#include <vector>

namespace stripeforge::inverse {

enum class ObjectiveKind { kTargetDeformation, kStiffnessProfile, kGeneralizedStiffness };

struct DesignObjective {
  ObjectiveKind kind = ObjectiveKind::kStiffnessProfile;
  double weight = 1.0;
  double w_sing = 1.0;
  double w_sm = 0.0;
  double dhat = 0.1;
  // profile: k(theta_i) against targets; generalized stiffness: sum c_i k(theta_i)
  std::vector<double> angles;
  std::vector<double> targets;
  double strain = 0.01;
  // target deformation: mid-surface positions under one macro load
  double load_angle = 0.0;
  double load_stretch = 1.05;
  MatX3 target;
};

struct DesignSetup {
  mesh::TriMesh mesh;
  std::array<Vec3, 2> lattice{Vec3::UnitX(), Vec3::UnitY()};
  double frequency = 2.0 * kPi;
  double a1 = 0.05;
  double a2 = 0.0;
  double h = 0.01;
  fem::Material soft;
  fem::Material stiff;
  DesignObjective objective;
  sim::HomogenizationOptions homogenization;
  eigen::EigenSolverOptions eigen;
  int pin = -1;  // -1: largest phase magnitude at the start point
};

/// Everything computed for one candidate (p, theta).
struct Evaluation {
  VecX p;
  double theta = 0.0;
  stripes::StripeMatrices matrices;
  stripes::EigenState eigen;
  VecX v_full;
  VecX alpha;
  stripes::LevelSet level;
  std::shared_ptr<const fem::ShellModel> model;  // equilibrium problems point into it
  std::vector<sim::HomogenizationResult> states;
  VecX k;  // stiffness samples (profile kinds)
  double objective = 0.0;  // weighted T
  double r_sing = 0.0;     // unweighted
  double r_smooth = 0.0;   // unweighted
  double merit = 0.0;
  double min_magnitude = 0.0;  // min_i |v_i|
};

struct DesignGradient {
  VecX dp;
  double dtheta = 0.0;
  SolveCounter solves;
  bool regularized = false;
};

/// Triangles whose phases span half a period or more (or wind) cannot be
/// represented with one interface. Returns the first offending triangle or -1.
int find_unresolved_triangle(const mesh::TriMesh& mesh, const VecX& alpha);

/// Evaluation context owning the mesh-derived data. Not shared between
/// threads; each optimizer run uses its own.
class DesignProblem {
 public:
  /// Fixes the pin vertex from `p0` unless the setup names one.
  DesignProblem(DesignSetup setup, const VecX& p0);

  const DesignSetup& setup() const { return setup_; }
  const mesh::TriMesh& mesh() const { return setup_.mesh; }
  const mesh::PeriodicMap& map() const { return map_; }
  const mesh::TangentFrames& frames() const { return frames_; }
  const VecX& weights() const { return weights_; }
  int num_params() const { return map_.num_reduced(); }
  int pin() const { return pin_; }

  /// Full per-vertex angles from design parameters.
  VecX full_params(const VecX& p) const { return map_.expand(p); }

  /// Candidate evaluation; `warm` supplies the previous equilibria.
  Evaluation evaluate(const VecX& p, double theta, const Evaluation* warm = nullptr) const;

  /// dMerit/dp and dMerit/dtheta by the two adjoint solves.
  DesignGradient gradient(const Evaluation& ev) const;

 private:
  DesignSetup setup_;
  mesh::PeriodicMap map_;
  mesh::TangentFrames frames_;
  VecX weights_;
  VecX transport_;
  fem::ShellModel base_;
  int pin_ = -1;
};

/// Radial field around the cell centre (concentric stripes), one angle per
/// representative vertex.
VecX concentric_params(const DesignProblem& problem);

}  // namespace stripeforge::inverse
