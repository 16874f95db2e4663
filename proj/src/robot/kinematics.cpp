#include "lipgp/robot/kinematics.hpp"

#include <cmath>

namespace lipgp::robot {

void dh_transform(const DhLink& dh, double qi, Mat3& rotation, Vec3& translation) {
  const bool revolute = dh.kind == JointKind::Revolute;
  const double theta = dh.theta0 + (revolute ? qi : 0.0);
  const double d = dh.d0 + (revolute ? 0.0 : qi);
  const double ct = std::cos(theta), st = std::sin(theta);
  const double ca = std::cos(dh.alpha), sa = std::sin(dh.alpha);
  // R_z(theta) R_x(alpha)
  rotation << ct, -st * ca, st * sa,
              st, ct * ca, -ct * sa,
              0.0, sa, ca;
  translation = Vec3(dh.a * ct, dh.a * st, d);
}

std::vector<LinkFrame> forward_kinematics(const RobotModel& model, const Vec& q) {
  require_dim(q.size(), model.dof(), "q");
  if (!q.allFinite()) throw std::invalid_argument("q must be finite");
  std::vector<LinkFrame> frames;
  frames.reserve(static_cast<std::size_t>(model.dof()));
  Mat3 rot = Mat3::Identity();
  Vec3 origin = Vec3::Zero();
  for (int i = 0; i < model.dof(); ++i) {
    const Link& link = model.link(i);
    Mat3 rel;
    Vec3 offset;
    dh_transform(link.dh, q(i), rel, offset);
    origin += rot * offset;
    rot = rot * rel;
    frames.push_back({rot, origin, origin + rot * link.inertial.com});
  }
  return frames;
}

std::vector<LinkJacobian> link_jacobians(const RobotModel& model, const Vec& q) {
  const auto frames = forward_kinematics(model, q);
  const int n = model.dof();
  std::vector<LinkJacobian> out;
  out.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    LinkJacobian jac{Mat::Zero(3, i + 1), Mat::Zero(3, i + 1)};
    const Vec3& c = frames[static_cast<std::size_t>(i)].com;
    for (int j = 0; j <= i; ++j) {
      // joint j moves about / along z_{j-1}, located at o_{j-1}
      const Vec3 z = j == 0 ? Vec3::UnitZ() : Vec3(frames[static_cast<std::size_t>(j - 1)].rotation.col(2));
      const Vec3 o = j == 0 ? Vec3::Zero() : frames[static_cast<std::size_t>(j - 1)].origin;
      if (model.link(j).dh.kind == JointKind::Revolute) {
        jac.position.col(j) = z.cross(c - o);
        jac.orientation.col(j) = z;
      } else {
        jac.position.col(j) = z;
      }
    }
    out.push_back(std::move(jac));
  }
  return out;
}

}  // namespace lipgp::robot
