#include "lipgp/robot/dynamics.hpp"

namespace lipgp::robot {

InertiaMatrix inertia_matrix(const RobotModel& model, const Vec& q) {
  const auto frames = forward_kinematics(model, q);
  const auto jacs = link_jacobians(model, q);
  const int n = model.dof();
  InertiaMatrix out{Mat::Zero(n, n), {}};
  out.per_link.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    const auto& p = model.link(i).inertial;
    const auto& jac = jacs[static_cast<std::size_t>(i)];
    const Mat3& r = frames[static_cast<std::size_t>(i)].rotation;
    const Mat3 world_inertia = r * p.inertia * r.transpose();
    Mat bi = p.mass * jac.position.transpose() * jac.position +
             jac.orientation.transpose() * world_inertia * jac.orientation;
    bi = 0.5 * (bi + bi.transpose()).eval();
    out.total.topLeftCorner(i + 1, i + 1) += bi;
    out.per_link.push_back(std::move(bi));
  }
  return out;
}

Vec inverse_dynamics(const RobotModel& model, const JointState& s, bool include_friction) {
  const Vec w = model.dynamic_parameters();
  return inverse_dynamics(model, std::span<const double>(w.data(), static_cast<std::size_t>(w.size())), s,
                          include_friction);
}

Vec inverse_dynamics(const RobotModel& model, std::span<const double> w, const JointState& s,
                     bool include_friction) {
  validate_state(model, s);
  const int n = model.dof();
  require_dim(static_cast<long>(w.size()), model.num_dynamic_parameters(), "dynamic parameters");
  const auto frames = forward_kinematics(model, s.q);

  // Forward recursion in base-frame coordinates. `acc` is the acceleration of
  // each frame origin with gravity folded in as a base acceleration of -g0.
  std::vector<Vec3> omega(static_cast<std::size_t>(n)), omega_dot(static_cast<std::size_t>(n)),
      acc(static_cast<std::size_t>(n)), axis(static_cast<std::size_t>(n)), reach(static_cast<std::size_t>(n));
  Vec3 w_prev = Vec3::Zero(), wd_prev = Vec3::Zero(), a_prev = -model.gravity();
  Vec3 o_prev = Vec3::Zero();
  for (int i = 0; i < n; ++i) {
    const auto ui = static_cast<std::size_t>(i);
    const Vec3 z = i == 0 ? Vec3::UnitZ() : Vec3(frames[ui - 1].rotation.col(2));
    const Vec3 r = frames[ui].origin - o_prev;
    Vec3 wi = w_prev, wdi = wd_prev;
    Vec3 ai;
    if (model.link(i).dh.kind == JointKind::Revolute) {
      wi += s.qd(i) * z;
      wdi += s.qdd(i) * z + s.qd(i) * w_prev.cross(z);
      ai = a_prev + wdi.cross(r) + wi.cross(wi.cross(r));
    } else {
      ai = a_prev + wdi.cross(r) + wi.cross(wi.cross(r)) + 2.0 * s.qd(i) * wi.cross(z) + s.qdd(i) * z;
    }
    omega[ui] = wi;
    omega_dot[ui] = wdi;
    acc[ui] = ai;
    axis[ui] = z;
    reach[ui] = r;
    w_prev = wi;
    wd_prev = wdi;
    a_prev = ai;
    o_prev = frames[ui].origin;
  }

  // Backward recursion: force and moment (about o_i) transmitted to link i.
  Vec tau(n);
  Vec3 f_next = Vec3::Zero(), m_next = Vec3::Zero(), o_next = Vec3::Zero();
  for (int i = n - 1; i >= 0; --i) {
    const auto ui = static_cast<std::size_t>(i);
    const std::size_t o = static_cast<std::size_t>(RobotModel::kParamsPerLink * i);
    const double mass = w[o];
    const Mat3& rot = frames[ui].rotation;
    const Vec3 first_moment = rot * Vec3(w[o + 1], w[o + 2], w[o + 3]);
    Mat3 local_inertia;
    local_inertia << w[o + 4], w[o + 5], w[o + 6],
                     w[o + 5], w[o + 7], w[o + 8],
                     w[o + 6], w[o + 8], w[o + 9];
    const Mat3 inertia = rot * local_inertia * rot.transpose();
    const Vec3& wi = omega[ui];
    const Vec3& wdi = omega_dot[ui];
    const Vec3& ai = acc[ui];

    const Vec3 f_link = mass * ai + wdi.cross(first_moment) + wi.cross(wi.cross(first_moment));
    const Vec3 m_link = inertia * wdi + wi.cross(inertia * wi) + first_moment.cross(ai);

    const Vec3 force = f_link + f_next;
    Vec3 moment = m_link + m_next;
    if (i + 1 < n) moment += (o_next - frames[ui].origin).cross(f_next);

    if (model.link(i).dh.kind == JointKind::Revolute) {
      tau(i) = axis[ui].dot(moment + reach[ui].cross(force));
    } else {
      tau(i) = axis[ui].dot(force);
    }
    if (include_friction) tau(i) += w[o + 10] * s.qd(i) + w[o + 11] * signum(s.qd(i));

    f_next = force;
    m_next = moment;
    o_next = frames[ui].origin;
  }
  return tau;
}

Energies energies(const RobotModel& model, const Vec& q, const Vec& qd) {
  require_dim(qd.size(), model.dof(), "qd");
  const auto frames = forward_kinematics(model, q);
  const auto b = inertia_matrix(model, q);
  Energies e;
  e.kinetic_per_link.reserve(static_cast<std::size_t>(model.dof()));
  for (int i = 0; i < model.dof(); ++i) {
    const auto qdi = qd.head(i + 1);
    const double ti = 0.5 * qdi.dot(b.per_link[static_cast<std::size_t>(i)] * qdi);
    e.kinetic_per_link.push_back(ti);
    e.kinetic += ti;
    e.potential -= model.link(i).inertial.mass * model.gravity().dot(frames[static_cast<std::size_t>(i)].com);
  }
  return e;
}

Mat regressor_matrix(const RobotModel& model, const JointState& s) {
  const int nd = model.num_dynamic_parameters();
  Mat phi(model.dof(), nd);
  std::vector<double> unit(static_cast<std::size_t>(nd), 0.0);
  for (int j = 0; j < nd; ++j) {
    unit[static_cast<std::size_t>(j)] = 1.0;
    phi.col(j) = inverse_dynamics(model, unit, s, true);
    unit[static_cast<std::size_t>(j)] = 0.0;
  }
  return phi;
}

}  // namespace lipgp::robot
