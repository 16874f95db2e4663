#pragma once

#include "lipgp/kernel/expr.hpp"
#include "lipgp/robot/model.hpp"

#include <optional>

namespace lipgp::lip {

/// Friction features of joint i: phi(x) = [qd_i, sign(qd_i)] with sign(0) = 0.
Eigen::Vector2d friction_features(const robot::JointState& x, int joint);

/// Plain input (q, qd, qdd) used by the single-output SE baselines.
Vec stacked_input(const robot::JointState& x);

/// k^eps_i = phi(x) diag(gamma_v, gamma_c) phi(x')^T (+ SE on (q, qd, qdd)).
double friction_kernel(const robot::JointState& x, const robot::JointState& xp, double gamma_v, double gamma_c,
                       const std::optional<kernel::KernelAtom>& se_part, int joint);

/// K_SP = phi_i(x) diag(gamma) phi_i(x')^T + K_SE(x, x'), where phi_i is row i of
/// the regressor matrix.
double semiparametric_kernel(const Vec& phi_x, const Vec& phi_xp, const Vec& gamma, const kernel::KernelAtom& se,
                             const robot::JointState& x, const robot::JointState& xp);

}  // namespace lipgp::lip
