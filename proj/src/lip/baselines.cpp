#include "lipgp/lip/baselines.hpp"

namespace lipgp::lip {

Eigen::Vector2d friction_features(const robot::JointState& x, int joint) {
  if (joint < 0 || joint >= x.qd.size()) throw DimensionError("friction features: joint index out of range");
  return Eigen::Vector2d(x.qd(joint), signum(x.qd(joint)));
}

Vec stacked_input(const robot::JointState& x) {
  Vec v(x.q.size() + x.qd.size() + x.qdd.size());
  v << x.q, x.qd, x.qdd;
  return v;
}

double friction_kernel(const robot::JointState& x, const robot::JointState& xp, double gamma_v, double gamma_c,
                       const std::optional<kernel::KernelAtom>& se_part, int joint) {
  const auto a = friction_features(x, joint), b = friction_features(xp, joint);
  double k = gamma_v * a(0) * b(0) + gamma_c * a(1) * b(1);
  if (se_part) {
    const Vec u = stacked_input(x), v = stacked_input(xp);
    k += se_part->value(as_span(u), as_span(v));
  }
  return k;
}

double semiparametric_kernel(const Vec& phi_x, const Vec& phi_xp, const Vec& gamma, const kernel::KernelAtom& se,
                             const robot::JointState& x, const robot::JointState& xp) {
  require_dim(phi_x.size(), gamma.size(), "regressor row");
  require_dim(phi_xp.size(), gamma.size(), "regressor row");
  const Vec u = stacked_input(x), v = stacked_input(xp);
  return (phi_x.array() * gamma.array() * phi_xp.array()).sum() + se.value(as_span(u), as_span(v));
}

}  // namespace lipgp::lip
