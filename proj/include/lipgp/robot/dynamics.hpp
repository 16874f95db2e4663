#pragma once

#include "lipgp/robot/kinematics.hpp"

#include <span>
#include <vector>

namespace lipgp::robot {

struct InertiaMatrix {
  Mat total;                  // B(q), n x n
  std::vector<Mat> per_link;  // B_i(q^i), (i+1) x (i+1) for zero-based i
};

InertiaMatrix inertia_matrix(const RobotModel& model, const Vec& q);

/// Recursive Newton-Euler inverse dynamics:
/// tau = B(q) qdd + c(q, qd) + g(q) [+ fv qd + fc sign(qd)].
Vec inverse_dynamics(const RobotModel& model, const JointState& s, bool include_friction);

/// Same recursion driven by an explicit dynamic parameter vector (see
/// RobotModel for the layout). Kinematics and gravity come from `model`.
Vec inverse_dynamics(const RobotModel& model, std::span<const double> dynamic_params, const JointState& s,
                     bool include_friction);

struct Energies {
  std::vector<double> kinetic_per_link;
  double kinetic = 0.0;
  double potential = 0.0;
};

/// T_i = 1/2 qd^T B_i qd and V = -sum_i m_i g0^T c_i, so that the gravity
/// torque equals dV/dq.
Energies energies(const RobotModel& model, const Vec& q, const Vec& qd);

/// Phi(q, qd, qdd) with tau = Phi w_d; n x 12n. Column j is the inverse
/// dynamics evaluated with w_d = e_j.
Mat regressor_matrix(const RobotModel& model, const JointState& s);

}  // namespace lipgp::robot
