#include "fixtures.hpp"

#include "lipgp/data/dataset.hpp"
#include "lipgp/energy/estimator.hpp"
#include "lipgp/lip/lip_kernel.hpp"

#include <doctest.h>

#include <filesystem>
#include <fstream>

using namespace lipgp;
using robot::JointKind;

namespace {

const std::vector<JointKind> kTwoR{JointKind::Revolute, JointKind::Revolute};

struct Fitted {
  robot::RobotModel robot;
  std::shared_ptr<const gp::TrainedModel> model;
  data::Dataset test;
};

const Fitted& fitted_lip() {
  static const Fitted f = [] {
    const auto robot = fixtures::Planar2R{}.model();
    const auto limits = data::JointLimits::uniform(2, 2.5, 3.0, 8.0);
    data::SinusoidSpec train_spec;
    train_spec.omega_f = 0.2;
    train_spec.duration = 10.0;
    train_spec.seed = 21;
    data::SinusoidSpec test_spec = train_spec;
    test_spec.seed = 22;
    test_spec.harmonics = 100;
    const auto train = data::synthesize_dataset(robot, data::generate_trajectory(train_spec, limits, 2), Vec::Zero(2),
                                                false, 1);
    auto test = data::synthesize_dataset(robot, data::generate_trajectory(test_spec, limits, 2), Vec::Zero(2), false, 2);
    std::vector<gp::GpSample> xs;
    for (const auto& s : train.inputs) xs.push_back({s, Mat()});
    const gp::LagrangianCovariance cov("lip", lip::OperatorKernel(kTwoR, lip::lip_components(kTwoR)));
    gp::TrainOptions opts;
    opts.optimizer.max_iterations = 30;
    return Fitted{robot, gp::train(cov, xs, train.torques, opts).model, std::move(test)};
  }();
  return f;
}

double nmse(const Vec& est, const Vec& truth) { return (est - truth).squaredNorm() / truth.squaredNorm(); }

}  // namespace

TEST_CASE("kinetic posterior vanishes exactly at zero velocity and is even in velocity") {
  const auto& f = fitted_lip();
  data::Rng rng(3);
  std::vector<robot::JointState> qs;
  for (int i = 0; i < 8; ++i) {
    auto s = fixtures::random_state(rng, 2);
    if (i % 2 == 0) s.qd.setZero();
    qs.push_back(s);
  }
  const auto post = energy::estimate_energies(*f.model, qs);
  std::vector<robot::JointState> flipped = qs;
  for (auto& s : flipped) s.qd = -s.qd;
  const auto post_flipped = energy::estimate_energies(*f.model, flipped);
  for (std::size_t i = 0; i < qs.size(); ++i) {
    const auto k = static_cast<long>(i);
    if (i % 2 == 0) {
      CHECK(post.kinetic_mean(k) == 0.0);
      CHECK(post.kinetic_var(k) == 0.0);
    }
    CHECK(post_flipped.kinetic_mean(k) ==
          doctest::Approx(post.kinetic_mean(k)).epsilon(1e-10).scale(1e-12 * std::max(1.0, post.kinetic_mean.norm())));
    CHECK(post.potential_var(k) >= 0.0);
  }
}

TEST_CASE("energy estimates track oracle energies on held-out data") {
  const auto& f = fitted_lip();
  const auto post0 = energy::estimate_energies(*f.model, f.test.inputs, f.test.time);
  const auto oracle = energy::oracle_energies(f.robot, f.test.inputs);
  auto post = post0;
  energy::align_offset(post, 0, oracle.potential(0));
  const double kin = nmse(post.kinetic_mean, oracle.kinetic);
  const double pot = nmse(post.potential_mean, oracle.potential);
  const double total = nmse(post.kinetic_mean + post.potential_mean, oracle.kinetic + oracle.potential);
  INFO("kinetic " << kin << " potential " << pot << " total " << total);
  CHECK(kin < 1e-2);
  CHECK(pot < 1e-3);
  CHECK(total < 2e-2);
  // the raw potential differs from the aligned one by a single constant
  const Vec diff = post0.potential_mean - post.potential_mean;
  CHECK(diff.maxCoeff() - diff.minCoeff() <= 1e-12 * std::max(1.0, std::abs(post.potential_offset)));
  CHECK(post.kinetic_mean == post0.kinetic_mean);
}

TEST_CASE("offset alignment is a no-op at the anchor value and idempotent") {
  energy::EnergyPosterior post;
  post.potential_mean = Eigen::Vector3d(1.0, 2.0, 4.0);
  post.kinetic_mean = Eigen::Vector3d(0.5, 0.5, 0.5);
  auto same = post;
  energy::align_offset(same, 1, 2.0);
  CHECK(same.potential_mean == post.potential_mean);
  CHECK(same.potential_offset == 0.0);
  energy::align_offset(post, 2, 1.0);
  const Vec once = post.potential_mean;
  energy::align_offset(post, 2, 1.0);
  CHECK(post.potential_mean == once);
  CHECK(once == Vec(Eigen::Vector3d(-2.0, -1.0, 1.0)));
  CHECK(post.potential_offset == 3.0);
  CHECK_THROWS_AS(energy::align_offset(post, 3, 0.0), std::out_of_range);
}

TEST_CASE("energy estimation rejects kernels without an energy split") {
  data::Rng rng(4);
  std::vector<gp::GpSample> xs;
  for (int i = 0; i < 3; ++i) xs.push_back({fixtures::random_state(rng, 2), Mat()});
  Mat y = Mat::Ones(3, 2);
  auto lse = std::make_shared<gp::LagrangianCovariance>("lse", lip::OperatorKernel(kTwoR, lip::lse_components(kTwoR, 0.0, 0.0)));
  const gp::TrainedModel m(lse, Vec::Constant(2, -2.0), xs, y);
  CHECK_THROWS_AS(energy::estimate_energies(m, {xs[0].state}), UnsupportedOperation);
  auto se = std::make_shared<gp::ScalarCovariance>("se", 2, 0, gp::ScalarCovariance::Extra::None);
  const gp::TrainedModel ms(se, Vec::Constant(1, -2.0), xs, y.col(0));
  CHECK_THROWS_AS(energy::estimate_energies(ms, {xs[0].state}), UnsupportedOperation);
}

TEST_CASE("energy CSV layout") {
  const auto& f = fitted_lip();
  const std::vector<robot::JointState> qs(f.test.inputs.begin(), f.test.inputs.begin() + 3);
  const auto post = energy::estimate_energies(*f.model, qs, {0.0, 0.1, 0.2});
  const auto path = std::filesystem::temp_directory_path() / "lipgp_energy_test.csv";
  energy::write_energy_csv(post, energy::oracle_energies(f.robot, qs), path);
  std::ifstream in(path);
  std::string header, line;
  std::getline(in, header);
  CHECK(header == "t,T_mean,T_var,V_mean,V_var,T_oracle,V_oracle");
  int rows = 0;
  while (std::getline(in, line)) ++rows;
  CHECK(rows == 3);
  energy::write_energy_csv(post, std::nullopt, path);
  std::ifstream in2(path);
  std::getline(in2, header);
  CHECK(header == "t,T_mean,T_var,V_mean,V_var");
  std::filesystem::remove(path);
}
