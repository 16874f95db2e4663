#pragma once

#include "lipgp/data/trajectory.hpp"
#include "lipgp/robot/model.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace lipgp::data {

/// Time-indexed joint states with torque measurements. The noise model is
/// independent across samples with per-joint standard deviations sigma_e.
struct Dataset {
  std::vector<double> time;
  std::vector<robot::JointState> inputs;
  Mat torques;  // N x n
  Vec sigma_e;  // n

  int size() const { return static_cast<int>(inputs.size()); }
  int dof() const { return static_cast<int>(torques.cols()); }
  void validate() const;
  Dataset subset(const std::vector<int>& rows) const;
};

/// Torques = oracle inverse dynamics + N(0, sigma_e^2) noise per joint.
Dataset synthesize_dataset(const robot::RobotModel& model, const Trajectory& traj, const Vec& sigma_e,
                           bool include_friction, std::uint64_t seed);

/// CSV with header `t,q1..qn,qd1..qdn,qdd1..qddn,tau1..taun`. Values use the
/// shortest round-trip decimal form, so reading and rewriting is lossless.
void write_dataset_csv(const Dataset& d, const std::filesystem::path& path);
Dataset read_dataset_csv(const std::filesystem::path& path);

/// Sidecar metadata stored next to a dataset CSV (`<csv>.meta.json`).
struct DatasetMetadata {
  std::uint64_t seed = 0;
  Vec sigma_e;
  bool include_friction = false;
  SinusoidSpec trajectory;
  std::string robot;
};

std::filesystem::path metadata_path(const std::filesystem::path& csv);
void write_metadata(const DatasetMetadata& meta, const std::filesystem::path& csv);
DatasetMetadata read_metadata(const std::filesystem::path& csv);

nlohmann::json sinusoid_to_json(const SinusoidSpec& s);
SinusoidSpec sinusoid_from_json(const nlohmann::json& j);

/// Shortest round-trip formatting of a double.
std::string format_double(double v);
double parse_double(std::string_view s);

}  // namespace lipgp::data
