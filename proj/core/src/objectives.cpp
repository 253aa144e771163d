#include "stripeforge/objectives.hpp"

#include "stripeforge/error.hpp"

#include <Eigen/Geometry>

#include <cmath>
#include <string>

namespace stripeforge::inverse {

Term t_match(const MatX3& x, const MatX3& xt) {
  if (x.rows() != xt.rows()) throw ValidationError("target has a different number of points");
  Term t;
  const MatX3 d = x - xt;
  t.value = d.squaredNorm();
  t.gradient = 2.0 * Eigen::Map<const VecX>(d.data(), d.size());
  return t;
}

Term t_mat(const VecX& k, const VecX& khat) {
  if (k.size() != khat.size()) throw ValidationError("profile and targets differ in length");
  Term t;
  t.value = (k - khat).squaredNorm();
  t.gradient = 2.0 * (k - khat);
  return t;
}

double r_sing_scalar(double d, double dhat) {
  if (d >= dhat) return 0.0;
  return -(d - dhat) * (d - dhat) * std::log(d / dhat);
}

double r_sing_derivative(double d, double dhat) {
  if (d >= dhat) return 0.0;
  return -2.0 * (d - dhat) * std::log(d / dhat) - (d - dhat) * (d - dhat) / d;
}

Term r_sing(const VecX& v, double dhat) {
  if (!(dhat > 0.0)) throw ValidationError("barrier cutoff must be positive");
  Term t;
  t.gradient = VecX::Zero(v.size());
  for (Index i = 0; i < v.size() / 2; ++i) {
    const double a = v[2 * i], b = v[2 * i + 1];
    const double d = std::hypot(a, b);
    if (!(d > 0.0)) throw ValidationError("zero phase magnitude at vertex " + std::to_string(i));
    if (d >= dhat) continue;
    t.value += r_sing_scalar(d, dhat);
    const double g = r_sing_derivative(d, dhat) / d;
    t.gradient[2 * i] = g * a;
    t.gradient[2 * i + 1] = g * b;
  }
  return t;
}

VecX frame_transport_angles(const mesh::TriMesh& mesh, const mesh::TangentFrames& frames) {
  VecX delta(mesh.num_edges());
  for (int e = 0; e < mesh.num_edges(); ++e) {
    const auto& ed = mesh.edges()[e];
    const Vec3 ni = frames.normal.row(ed.i), nj = frames.normal.row(ed.j);
    // smallest rotation taking nj onto ni
    const Mat3 Q = Eigen::Quaterniond::FromTwoVectors(nj, ni).toRotationMatrix();
    const Vec3 t = Q * frames.t1.row(ed.j).transpose();
    delta[e] = std::atan2(t.dot(frames.t2.row(ed.i)), t.dot(frames.t1.row(ed.i)));
  }
  return delta;
}

Term r_smooth(const mesh::TriMesh& mesh, const VecX& p, const VecX& weights, const VecX& transport) {
  if (p.size() != mesh.num_vertices()) throw ValidationError("p must have one entry per vertex");
  Term t;
  t.gradient = VecX::Zero(p.size());
  for (int e = 0; e < mesh.num_edges(); ++e) {
    const auto& ed = mesh.edges()[e];
    const double d = p[ed.i] - p[ed.j] - transport[e];
    // |exp(i a) - exp(i b)|^2 = 2 - 2 cos(a - b)
    t.value += 2.0 * weights[e] * (1.0 - std::cos(d));
    const double g = 2.0 * weights[e] * std::sin(d);
    t.gradient[ed.i] += g;
    t.gradient[ed.j] -= g;
  }
  return t;
}

}  // namespace stripeforge::inverse
