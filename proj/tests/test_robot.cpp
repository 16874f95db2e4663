#include "fixtures.hpp"

#include "lipgp/robot/config_io.hpp"
#include "lipgp/robot/dynamics.hpp"

#include <doctest.h>

#include <numbers>

using namespace lipgp;
using namespace lipgp::robot;
using fixtures::rel_err;

namespace {

// tau = B qdd + c + g with c + g from the Lagrangian of T - V by central
// differences: c_i + g_i = sum_j dB_ij/dq_k qd_j qd_k - 1/2 qd^T dB/dq_i qd + dV/dq_i.
Vec lagrangian_torque(const RobotModel& model, const JointState& s) {
  const int n = model.dof();
  const double h = 1e-6;
  Vec tau = inertia_matrix(model, s.q).total * s.qdd;
  std::vector<Mat> db(static_cast<std::size_t>(n));
  Vec dv(n);
  for (int k = 0; k < n; ++k) {
    Vec qp = s.q, qm = s.q;
    qp(k) += h;
    qm(k) -= h;
    db[static_cast<std::size_t>(k)] = (inertia_matrix(model, qp).total - inertia_matrix(model, qm).total) / (2 * h);
    const Vec zero = Vec::Zero(n);
    dv(k) = (energies(model, qp, zero).potential - energies(model, qm, zero).potential) / (2 * h);
  }
  for (int i = 0; i < n; ++i) {
    double c = 0.0;
    for (int k = 0; k < n; ++k) c += (db[static_cast<std::size_t>(k)].row(i) * s.qd)(0) * s.qd(k);
    c -= 0.5 * s.qd.dot(db[static_cast<std::size_t>(i)] * s.qd);
    tau(i) += c + dv(i);
  }
  return tau;
}

}  // namespace

TEST_CASE("forward kinematics: zero-angle pendulum and rotation group") {
  InertialParams in;
  in.mass = 1.0;
  in.com = Vec3(0.1, 0.2, 0.0);
  RobotModel m({Link{DhLink{0.7, 0.0, 0.0, 0.0, JointKind::Revolute}, in}}, fixtures::kPlanarGravity);
  const auto f = forward_kinematics(m, Vec::Zero(1));
  CHECK(f[0].com.isApprox(Vec3(0.8, 0.2, 0.0), 1e-15));

  const auto r = fixtures::spatial_rpr();
  data::Rng rng(3);
  for (int t = 0; t < 20; ++t) {
    for (const auto& fr : forward_kinematics(r, fixtures::random_vec(rng, 3, -3, 3))) {
      CHECK((fr.rotation * fr.rotation.transpose() - Mat3::Identity()).norm() < 1e-12);
      CHECK(std::abs(fr.rotation.determinant() - 1.0) < 1e-12);
    }
  }
}

TEST_CASE("forward kinematics: planar arm at (pi/2, -pi/2) keeps the base x axis") {
  const auto m = fixtures::Planar2R{}.model();
  const auto f = forward_kinematics(m, Eigen::Vector2d(std::numbers::pi / 2, -std::numbers::pi / 2));
  CHECK((f[1].rotation.col(0) - Vec3::UnitX()).norm() < 1e-15);
}

TEST_CASE("link jacobians match finite differences") {
  const auto m = fixtures::spatial_rpr();
  data::Rng rng(11);
  const double h = 1e-6;
  for (int t = 0; t < 10; ++t) {
    const Vec q = fixtures::random_vec(rng, 3, -2, 2);
    const auto jac = link_jacobians(m, q);
    for (int j = 0; j < 3; ++j) {
      Vec qp = q, qm = q;
      qp(j) += h;
      qm(j) -= h;
      const auto fp = forward_kinematics(m, qp), fm = forward_kinematics(m, qm);
      for (int i = j; i < 3; ++i) {
        const auto ui = static_cast<std::size_t>(i);
        const Vec3 fd = (fp[ui].com - fm[ui].com) / (2 * h);
        CHECK((fd - jac[ui].position.col(j)).norm() <= 1e-6 * std::max(1.0, fd.norm()));
      }
    }
    // prismatic joint contributes no angular velocity
    for (int i = 1; i < 3; ++i) CHECK(jac[static_cast<std::size_t>(i)].orientation.col(1).norm() == 0.0);
  }
  const auto p = fixtures::pendulum(1.0, 0.8);
  const auto jp = link_jacobians(p, Vec::Constant(1, 0.4));
  CHECK(std::abs((jp[0].position * 1.7).norm() - 0.8 * 1.7) < 1e-14);
}

TEST_CASE("inertia matrix: pendulum, symmetry and planar 2R closed form") {
  const auto p = fixtures::pendulum(2.0, 0.5);
  CHECK(std::abs(inertia_matrix(p, Vec::Constant(1, 0.3)).total(0, 0) - 0.5) < 1e-15);

  const fixtures::Planar2R arm;
  const auto m = arm.model();
  data::Rng rng(5);
  for (int t = 0; t < 50; ++t) {
    const Vec q = fixtures::random_vec(rng, 2, -3, 3);
    const Mat b = inertia_matrix(m, q).total;
    CHECK((b - b.transpose()).norm() == 0.0);
    CHECK((b - arm.inertia(q)).cwiseAbs().maxCoeff() <= 1e-10 * arm.inertia(q).cwiseAbs().maxCoeff());
  }
  const auto r = fixtures::spatial_rpr();
  for (int t = 0; t < 20; ++t) {
    const Mat b = inertia_matrix(r, fixtures::random_vec(rng, 3, -2, 2)).total;
    CHECK((b - b.transpose()).norm() < 1e-14);
    CHECK(Eigen::SelfAdjointEigenSolver<Mat>(b).eigenvalues().minCoeff() > 0.0);
  }
}

TEST_CASE("inverse dynamics: pendulum value and gravity-only states") {
  const auto p = fixtures::pendulum();
  const auto tau = inverse_dynamics(p, make_state(Vec::Zero(1), Vec::Zero(1), Vec::Ones(1)), false);
  CHECK(tau(0) == doctest::Approx(10.81).epsilon(1e-14));

  const auto r = fixtures::spatial_rpr();
  data::Rng rng(8);
  const Vec q = fixtures::random_vec(rng, 3, -2, 2);
  const Vec g = inverse_dynamics(r, make_state(q, Vec::Zero(3), Vec::Zero(3)), true);
  const double h = 1e-6;
  for (int i = 0; i < 3; ++i) {
    Vec qp = q, qm = q;
    qp(i) += h;
    qm(i) -= h;
    const double dv = (energies(r, qp, Vec::Zero(3)).potential - energies(r, qm, Vec::Zero(3)).potential) / (2 * h);
    INFO("joint " << i << " g=" << g(i) << " dv=" << dv);
    CHECK(std::abs(g(i) - dv) < 1e-7 * std::max(1.0, g.norm()));
  }
}

TEST_CASE("inverse dynamics agrees with the Lagrangian of T - V") {
  data::Rng rng(21);
  for (const auto& m : {fixtures::Planar2R{}.model(), fixtures::spatial_rpr()}) {
    for (int t = 0; t < 20; ++t) {
      const auto s = fixtures::random_state(rng, m.dof());
      const Vec a = inverse_dynamics(m, s, false);
      const Vec b = lagrangian_torque(m, s);
      CHECK((a - b).norm() <= 1e-8 * std::max(1.0, a.norm()));
    }
  }
}

TEST_CASE("friction term uses sign(0) = 0") {
  const auto m = fixtures::Planar2R{}.model(0.4, 0.7);
  data::Rng rng(2);
  auto s = fixtures::random_state(rng, 2);
  s.qd(0) = 0.0;
  s.qd(1) = -1.2;
  const Vec d = inverse_dynamics(m, s, true) - inverse_dynamics(m, s, false);
  CHECK(d(0) == 0.0);
  CHECK(d(1) == doctest::Approx(0.4 * -1.2 - 0.7));
}

TEST_CASE("energies: pendulum values and zero velocity") {
  const auto p = fixtures::pendulum(1.5, 0.8);
  const auto e = energies(p, Vec::Constant(1, 0.6), Vec::Constant(1, 2.0));
  CHECK(e.kinetic == doctest::Approx(0.5 * 1.5 * 0.64 * 4.0));
  CHECK(e.potential == doctest::Approx(1.5 * 9.81 * 0.8 * std::sin(0.6)));
  const auto r = fixtures::spatial_rpr();
  const auto z = energies(r, Vec::Constant(3, 0.3), Vec::Zero(3));
  CHECK(z.kinetic == 0.0);
  for (double ti : z.kinetic_per_link) CHECK(ti == 0.0);
}

TEST_CASE("regressor: linearity, pendulum gravity column and mass homogeneity") {
  const auto r = fixtures::spatial_rpr();
  data::Rng rng(4);
  for (int t = 0; t < 20; ++t) {
    const auto s = fixtures::random_state(rng, 3);
    const Mat phi = regressor_matrix(r, s);
    CHECK(phi.cols() == 36);
    const Vec a = inverse_dynamics(r, s, true);
    const Vec b = phi * r.dynamic_parameters();
    CHECK((a - b).norm() <= 1e-13 * std::max(1.0, a.norm()));
    const auto r2 = r.with_scaled_masses(2.0);
    const Vec c = regressor_matrix(r2, s) * r2.dynamic_parameters();
    const Vec a_nf = inverse_dynamics(r, s, false);
    const Vec c_nf = inverse_dynamics(r2, s, false);
    CHECK((c_nf - 2.0 * a_nf).norm() <= 1e-12 * std::max(1.0, a_nf.norm()));
    CHECK((c - inverse_dynamics(r2, s, true)).norm() <= 1e-12 * std::max(1.0, c.norm()));
  }
  const auto p = fixtures::pendulum();
  const Mat phi = regressor_matrix(p, make_state(Vec::Zero(1), Vec::Zero(1), Vec::Zero(1)));
  // first moment m*cx (about the frame origin at the tip): gravity torque per unit m*cx
  CHECK(phi(0, 1) == doctest::Approx(9.81));
}

TEST_CASE("robot config round trip") {
  const auto r = fixtures::spatial_rpr();
  const auto back = robot_from_json(robot_to_json(r));
  CHECK((back.dynamic_parameters() - r.dynamic_parameters()).norm() < 1e-14);
  CHECK(back.joint_kinds() == r.joint_kinds());
  CHECK_THROWS_AS(robot_from_json(nlohmann::json::parse(R"({"links":[{"joint":"revolute","mass":-1}]})")),
                  std::invalid_argument);
}
