#include "lipgp/robot/model.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>

namespace lipgp::robot {

namespace {

void validate_inertial(const InertialParams& p, std::size_t index) {
  const std::string where = "link " + std::to_string(index + 1);
  if (!(p.mass > 0.0) || !std::isfinite(p.mass)) {
    throw std::invalid_argument(where + ": mass must be positive");
  }
  if (!p.com.allFinite() || !p.inertia.allFinite()) {
    throw std::invalid_argument(where + ": non-finite inertial parameters");
  }
  if ((p.inertia - p.inertia.transpose()).cwiseAbs().maxCoeff() > 1e-12 * (1.0 + p.inertia.norm())) {
    throw std::invalid_argument(where + ": inertia tensor is not symmetric");
  }
  Eigen::SelfAdjointEigenSolver<Mat3> es(p.inertia, Eigen::EigenvaluesOnly);
  if (es.eigenvalues().minCoeff() < -1e-12 * (1.0 + p.inertia.norm())) {
    throw std::invalid_argument(where + ": inertia tensor is not positive semidefinite");
  }
  if (p.viscous < 0.0 || p.coulomb < 0.0) {
    throw std::invalid_argument(where + ": friction coefficients must be non-negative");
  }
}

}  // namespace

RobotModel::RobotModel(std::vector<Link> links, Vec3 gravity)
    : links_(std::move(links)), gravity_(gravity) {
  if (links_.empty()) throw std::invalid_argument("robot model needs at least one link");
  for (std::size_t i = 0; i < links_.size(); ++i) validate_inertial(links_[i].inertial, i);
  if (!gravity_.allFinite()) throw std::invalid_argument("gravity must be finite");
}

std::vector<JointKind> RobotModel::joint_kinds() const {
  std::vector<JointKind> kinds;
  kinds.reserve(links_.size());
  for (const auto& l : links_) kinds.push_back(l.dh.kind);
  return kinds;
}

std::vector<int> RobotModel::revolute_indices() const {
  std::vector<int> out;
  for (int i = 0; i < dof(); ++i)
    if (links_[static_cast<std::size_t>(i)].dh.kind == JointKind::Revolute) out.push_back(i);
  return out;
}

std::vector<int> RobotModel::prismatic_indices() const {
  std::vector<int> out;
  for (int i = 0; i < dof(); ++i)
    if (links_[static_cast<std::size_t>(i)].dh.kind == JointKind::Prismatic) out.push_back(i);
  return out;
}

Vec RobotModel::dynamic_parameters() const {
  Vec w(num_dynamic_parameters());
  for (int i = 0; i < dof(); ++i) {
    const auto& p = links_[static_cast<std::size_t>(i)].inertial;
    const Vec3& c = p.com;
    // parallel-axis shift to the link frame origin
    const Mat3 io = p.inertia + p.mass * (c.squaredNorm() * Mat3::Identity() - c * c.transpose());
    const int o = kParamsPerLink * i;
    w(o + 0) = p.mass;
    w.segment<3>(o + 1) = p.mass * c;
    w(o + 4) = io(0, 0);
    w(o + 5) = io(0, 1);
    w(o + 6) = io(0, 2);
    w(o + 7) = io(1, 1);
    w(o + 8) = io(1, 2);
    w(o + 9) = io(2, 2);
    w(o + 10) = p.viscous;
    w(o + 11) = p.coulomb;
  }
  return w;
}

RobotModel RobotModel::with_scaled_masses(double factor) const {
  std::vector<Link> scaled = links_;
  for (auto& l : scaled) {
    l.inertial.mass *= factor;
    l.inertial.inertia *= factor;
  }
  return RobotModel(std::move(scaled), gravity_);
}

void validate_state(const RobotModel& model, const JointState& s) {
  require_dim(s.q.size(), model.dof(), "q");
  require_dim(s.qd.size(), model.dof(), "qd");
  require_dim(s.qdd.size(), model.dof(), "qdd");
  if (!s.q.allFinite() || !s.qd.allFinite() || !s.qdd.allFinite()) {
    throw std::invalid_argument("joint state must be finite");
  }
}

JointState make_state(const Vec& q, const Vec& qd, const Vec& qdd) { return JointState{q, qd, qdd}; }

}  // namespace lipgp::robot
