#pragma once

#include "lipgp/kernel/expr.hpp"
#include "lipgp/lip/transform.hpp"

#include <vector>

namespace lipgp::lip {

/// Which energy a Lagrangian kernel component models. LSE-style kernels model
/// the whole Lagrangian at once and cannot be split.
enum class EnergyPart { Kinetic, Potential, Lagrangian };

struct LagrangianComponent {
  kernel::KernelExpr expr;
  EnergyPart part = EnergyPart::Lagrangian;
};

/// LIP energy priors over the coordinates of LagrangianCoordinates:
///   k^T_i = k_hom^(2)(qd^i) * prod_{b<=i} k_pk^(2)(position block b),  i = 1..n
///   k^V   = prod_b k_pk^(1)(position block b)
/// with position block (cos q_b, sin q_b) for revolute joints and q_b for
/// prismatic ones. Components are returned as [k^T_1, ..., k^T_n, k^V]; all
/// log-weights start at 0.
std::vector<LagrangianComponent> lip_components(const std::vector<robot::JointKind>& kinds);

/// A single SE kernel on (q_c, q_s, q_p, qd) modelling the whole Lagrangian.
std::vector<LagrangianComponent> lse_components(const std::vector<robot::JointKind>& kinds,
                                                double log_scale = 0.0, double log_lengthscale = 0.0);

/// k^L = sum of all components, as one tagged expression ("kinetic", "potential").
kernel::KernelExpr lagrangian_expr(const std::vector<LagrangianComponent>& comps);

/// Scalar k^L(x, x') evaluated on joint states (accelerations are ignored).
double lagrangian_kernel(const std::vector<LagrangianComponent>& comps, const std::vector<robot::JointKind>& kinds,
                         const robot::JointState& x, const robot::JointState& xp);

/// Kernel coordinates of a state, matching LagrangianCoordinates.
Vec lagrangian_coordinates(const robot::JointState& s, const std::vector<robot::JointKind>& kinds);

}  // namespace lipgp::lip
