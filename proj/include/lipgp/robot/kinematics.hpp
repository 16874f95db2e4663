#pragma once

#include "lipgp/robot/model.hpp"

#include <vector>

namespace lipgp::robot {

/// Pose of link frame i in the base frame, plus the link's center of mass.
struct LinkFrame {
  Mat3 rotation;  // R_i^0
  Vec3 origin;    // o_i
  Vec3 com;       // c_i
};

/// Frames 1..n (index 0 holds link 1).
std::vector<LinkFrame> forward_kinematics(const RobotModel& model, const Vec& q);

/// Jacobians of link i: position (COM) and orientation, both 3 x (i+1) for the
/// zero-based link index i.
struct LinkJacobian {
  Mat position;
  Mat orientation;
};

std::vector<LinkJacobian> link_jacobians(const RobotModel& model, const Vec& q);

/// Elementary DH transform of link i relative to frame i-1 for coordinate q_i.
void dh_transform(const DhLink& dh, double qi, Mat3& rotation, Vec3& translation);

}  // namespace lipgp::robot
