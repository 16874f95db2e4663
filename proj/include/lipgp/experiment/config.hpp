#pragma once

#include "lipgp/data/trajectory.hpp"
#include "lipgp/gp/optimizer.hpp"
#include "lipgp/robot/model.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <filesystem>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace lipgp::experiment {

/// Invalid or inconsistent configuration (reported with exit code 2 by the CLI).
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// One experiment / command configuration. Relative paths are resolved
/// against the directory of the config file. See README for the schema.
struct ExperimentConfig {
  std::filesystem::path base_dir;
  nlohmann::json robot_json;
  std::string robot_name;

  std::vector<std::string> estimators{"lip"};
  data::SinusoidSpec train_trajectory;
  data::SinusoidSpec test_trajectory;
  data::JointLimits limits;
  Vec noise_sigma;
  bool include_friction = false;

  int runs = 10;
  std::uint64_t seed = 0;
  std::vector<int> train_sizes;

  gp::OptimizerOptions optimizer;
  bool learn_noise = true;
  double noise_floor = 1e-6;
  int max_optimization_samples = 0;  // 0: optimise on the full training set
  std::map<std::string, Vec> initial_log_params;

  int workers = 0;  // 0: hardware concurrency
  double id_ridge = 1e-8;

  std::filesystem::path dataset, test_dataset, checkpoint;
  std::filesystem::path output_dir{"results"};

  robot::RobotModel robot() const;
  int dof() const;
  void validate() const;
  nlohmann::json to_json() const;
};

ExperimentConfig config_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir = {});
ExperimentConfig load_config(const std::filesystem::path& path);

/// Derived seed for (run, purpose); purposes: 0 train trajectory, 1 test
/// trajectory, 2 train noise, 3 test noise, 4 subset selection.
std::uint64_t run_seed(std::uint64_t seed, int run, int purpose);

}  // namespace lipgp::experiment
