#pragma once

#include "lipgp/common.hpp"

#include <span>
#include <vector>

namespace lipgp::robot {

enum class JointKind { Revolute, Prismatic };

/// Denavit-Hartenberg parameters of one link. Revolute joints add q to theta0,
/// prismatic joints add q to d0.
struct DhLink {
  double a = 0.0;
  double alpha = 0.0;
  double d0 = 0.0;
  double theta0 = 0.0;
  JointKind kind = JointKind::Revolute;
};

/// Inertial and friction parameters of one link, expressed in the link frame.
/// `inertia` is taken about the center of mass, with link-frame axes.
struct InertialParams {
  double mass = 1.0;
  Vec3 com = Vec3::Zero();
  Mat3 inertia = Mat3::Zero();
  double viscous = 0.0;
  double coulomb = 0.0;
};

struct Link {
  DhLink dh;
  InertialParams inertial;
};

struct JointState {
  Vec q;
  Vec qd;
  Vec qdd;
};

/// Serial manipulator: DH chain, inertial parameters and gravity.
///
/// The dynamic parameter vector w_d uses 12 entries per link, in order
/// [m, m*cx, m*cy, m*cz, Ixx, Ixy, Ixz, Iyy, Iyz, Izz, fv, fc], where the
/// inertia entries are taken about the link frame origin. Every torque
/// produced by the oracle is linear in this vector.
class RobotModel {
 public:
  static constexpr int kParamsPerLink = 12;

  RobotModel(std::vector<Link> links, Vec3 gravity);

  int dof() const { return static_cast<int>(links_.size()); }
  const std::vector<Link>& links() const { return links_; }
  const Link& link(int i) const { return links_.at(static_cast<std::size_t>(i)); }
  const Vec3& gravity() const { return gravity_; }

  std::vector<JointKind> joint_kinds() const;
  std::vector<int> revolute_indices() const;
  std::vector<int> prismatic_indices() const;

  /// Standard (frame-origin) dynamic parameters, 12 per link.
  Vec dynamic_parameters() const;
  int num_dynamic_parameters() const { return kParamsPerLink * dof(); }

  /// Same kinematics with all masses (and first/second moments) scaled.
  RobotModel with_scaled_masses(double factor) const;

 private:
  std::vector<Link> links_;
  Vec3 gravity_;
};

/// Gravity default for spatial robots.
inline Vec3 default_gravity() { return Vec3(0.0, 0.0, -9.81); }

void validate_state(const RobotModel& model, const JointState& s);
JointState make_state(const Vec& q, const Vec& qd, const Vec& qdd);

}  // namespace lipgp::robot
