#include "lipgp/lip/transform.hpp"

#include <cmath>

namespace lipgp::lip {

using robot::JointKind;

TransformedInput transform_input(const Vec& q, const Vec& qd, const Vec& qdd, const std::vector<JointKind>& kinds) {
  const auto n = static_cast<long>(kinds.size());
  require_dim(q.size(), n, "q");
  require_dim(qd.size(), n, "qd");
  require_dim(qdd.size(), n, "qdd");
  TransformedInput t;
  std::vector<double> c, s, p;
  for (long i = 0; i < n; ++i) {
    if (kinds[static_cast<std::size_t>(i)] == JointKind::Revolute) {
      c.push_back(std::cos(q(i)));
      s.push_back(std::sin(q(i)));
    } else {
      p.push_back(q(i));
    }
  }
  auto to_vec = [](const std::vector<double>& v) {
    return Vec(Eigen::Map<const Vec>(v.data(), static_cast<long>(v.size())));
  };
  t.qc = to_vec(c);
  t.qs = to_vec(s);
  t.qp = to_vec(p);
  t.qd = qd;
  t.qdd = qdd;
  t.q = q;
  return t;
}

LagrangianCoordinates::LagrangianCoordinates(const std::vector<JointKind>& kinds)
    : dof(static_cast<int>(kinds.size())) {
  const int n = dof;
  int nr = 0;
  for (auto k : kinds) nr += k == JointKind::Revolute;
  const int np = n - nr;
  map.num_vars = 2 * n;
  map.coords.resize(static_cast<std::size_t>(2 * nr + np + n));
  cos.assign(static_cast<std::size_t>(n), -1);
  sin.assign(static_cast<std::size_t>(n), -1);
  prismatic.assign(static_cast<std::size_t>(n), -1);
  velocity.assign(static_cast<std::size_t>(n), -1);
  int r = 0, p = 0;
  for (int i = 0; i < n; ++i) {
    const auto ui = static_cast<std::size_t>(i);
    if (kinds[ui] == JointKind::Revolute) {
      cos[ui] = r;
      sin[ui] = nr + r;
      map.coords[static_cast<std::size_t>(cos[ui])] = {var_q(i), kernel::CoordMap::Cos};
      map.coords[static_cast<std::size_t>(sin[ui])] = {var_q(i), kernel::CoordMap::Sin};
      ++r;
    } else {
      prismatic[ui] = 2 * nr + p;
      map.coords[static_cast<std::size_t>(prismatic[ui])] = {var_q(i), kernel::CoordMap::Identity};
      ++p;
    }
    velocity[ui] = 2 * nr + np + i;
    map.coords[static_cast<std::size_t>(velocity[ui])] = {var_qd(i), kernel::CoordMap::Identity};
  }
}

std::vector<int> LagrangianCoordinates::position_block(int b) const {
  const auto ub = static_cast<std::size_t>(b);
  if (prismatic[ub] >= 0) return {prismatic[ub]};
  return {cos[ub], sin[ub]};
}

Vec LagrangianCoordinates::raw(const robot::JointState& s) {
  Vec v(s.q.size() + s.qd.size());
  v << s.q, s.qd;
  return v;
}

}  // namespace lipgp::lip
