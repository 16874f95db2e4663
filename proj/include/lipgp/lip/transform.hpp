#pragma once

#include "lipgp/kernel/program.hpp"
#include "lipgp/robot/model.hpp"

#include <vector>

namespace lipgp::lip {

/// Trigonometric substitution of the revolute coordinates.
struct TransformedInput {
  Vec qc, qs;  // cos / sin of revolute coordinates, N_r each
  Vec qp;      // prismatic coordinates, N_p
  Vec qd, qdd; // n each
  Vec q;       // raw positions, kept for derivative bookkeeping
};

TransformedInput transform_input(const Vec& q, const Vec& qd, const Vec& qdd,
                                 const std::vector<robot::JointKind>& kinds);

/// Kernel coordinates [q_c (N_r), q_s (N_r), q_p (N_p), qd (n)] as functions of
/// the raw variables [q (n), qd (n)], plus the coordinate indices per joint.
struct LagrangianCoordinates {
  kernel::InputMap map;
  std::vector<int> cos, sin, prismatic;  // per joint; -1 where not applicable
  std::vector<int> velocity;             // per joint
  int dof = 0;

  explicit LagrangianCoordinates(const std::vector<robot::JointKind>& kinds);
  /// Coordinates of joint b's position block: (cos, sin) or (q_p).
  std::vector<int> position_block(int b) const;
  int var_q(int i) const { return i; }
  int var_qd(int i) const { return dof + i; }
  /// Raw variable vector [q, qd].
  static Vec raw(const robot::JointState& s);
};

}  // namespace lipgp::lip
