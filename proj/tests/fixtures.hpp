#pragma once

#include "lipgp/data/random.hpp"
#include "lipgp/robot/model.hpp"

#include <cmath>
#include <numbers>
#include <vector>

namespace fixtures {

using lipgp::Mat3;
using lipgp::Vec;
using lipgp::Vec3;
using lipgp::robot::DhLink;
using lipgp::robot::InertialParams;
using lipgp::robot::JointKind;
using lipgp::robot::JointState;
using lipgp::robot::Link;
using lipgp::robot::RobotModel;

inline const Vec3 kPlanarGravity(0.0, -9.81, 0.0);

/// Point mass m at distance l from a revolute joint about z; q = 0 points along +x.
inline RobotModel pendulum(double m = 1.0, double l = 1.0) {
  InertialParams in;
  in.mass = m;
  return RobotModel({Link{DhLink{l, 0.0, 0.0, 0.0, JointKind::Revolute}, in}}, kPlanarGravity);
}

struct Planar2R {
  double m1 = 1.3, m2 = 0.9;
  double l1 = 0.6, l2 = 0.5;
  double lc1 = 0.35, lc2 = 0.22;
  double i1 = 0.04, i2 = 0.025;  // Izz about the COM

  RobotModel model(double fv = 0.0, double fc = 0.0) const {
    auto link = [&](double m, double l, double lc, double izz) {
      InertialParams in;
      in.mass = m;
      // DH frame i sits at the distal end of link i
      in.com = Vec3(lc - l, 0.0, 0.0);
      in.inertia = Mat3::Zero();
      in.inertia(0, 0) = 0.3 * izz;
      in.inertia(1, 1) = 0.7 * izz;
      in.inertia(2, 2) = izz;
      in.viscous = fv;
      in.coulomb = fc;
      return Link{DhLink{l, 0.0, 0.0, 0.0, JointKind::Revolute}, in};
    };
    return RobotModel({link(m1, l1, lc1, i1), link(m2, l2, lc2, i2)}, kPlanarGravity);
  }

  lipgp::Mat inertia(const Vec& q) const {
    const double c2 = std::cos(q(1));
    lipgp::Mat b(2, 2);
    b(0, 0) = m1 * lc1 * lc1 + i1 + m2 * (l1 * l1 + lc2 * lc2 + 2.0 * l1 * lc2 * c2) + i2;
    b(0, 1) = b(1, 0) = m2 * (lc2 * lc2 + l1 * lc2 * c2) + i2;
    b(1, 1) = m2 * lc2 * lc2 + i2;
    return b;
  }
};

/// Spatial 3-DOF arm with a prismatic middle joint and full inertia tensors.
inline RobotModel spatial_rpr() {
  auto inertia = [](double a, double b, double c, double off) {
    Mat3 m;
    m << a, off, 0.5 * off, off, b, -off, 0.5 * off, -off, c;
    return m;
  };
  std::vector<Link> links;
  InertialParams p1{2.0, Vec3(0.05, -0.1, 0.02), inertia(0.03, 0.04, 0.02, 0.002), 0.3, 0.2};
  InertialParams p2{1.5, Vec3(0.0, 0.03, -0.15), inertia(0.02, 0.02, 0.01, 0.001), 0.5, 0.1};
  InertialParams p3{0.8, Vec3(-0.1, 0.0, 0.03), inertia(0.01, 0.015, 0.012, 0.0005), 0.2, 0.05};
  links.push_back(Link{DhLink{0.1, std::numbers::pi / 2, 0.3, 0.0, JointKind::Revolute}, p1});
  links.push_back(Link{DhLink{0.0, -std::numbers::pi / 2, 0.4, std::numbers::pi / 2, JointKind::Prismatic}, p2});
  links.push_back(Link{DhLink{0.35, 0.0, 0.05, 0.0, JointKind::Revolute}, p3});
  return RobotModel(std::move(links), lipgp::robot::default_gravity());
}

inline Vec random_vec(lipgp::data::Rng& rng, int n, double lo, double hi) {
  Vec v(n);
  for (int i = 0; i < n; ++i) v(i) = rng.uniform(lo, hi);
  return v;
}

inline JointState random_state(lipgp::data::Rng& rng, int n) {
  return JointState{random_vec(rng, n, -2.0, 2.0), random_vec(rng, n, -1.5, 1.5), random_vec(rng, n, -3.0, 3.0)};
}

inline double rel_err(double a, double b, double floor = 1e-12) {
  return std::abs(a - b) / std::max({std::abs(a), std::abs(b), floor});
}

}  // namespace fixtures
