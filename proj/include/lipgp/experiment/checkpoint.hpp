#pragma once

#include "lipgp/experiment/estimators.hpp"

#include <filesystem>
#include <memory>

namespace lipgp::experiment {

/// Writes a fitted estimator to JSON (field reference in README). The training
/// set path is stored relative to the checkpoint's directory.
void save_checkpoint(const Estimator& est, const robot::RobotModel& robot, const std::filesystem::path& training_set,
                     const std::filesystem::path& path);

struct LoadedCheckpoint {
  std::unique_ptr<Estimator> estimator;
  robot::RobotModel robot;
  std::filesystem::path training_set;
  data::Dataset train;
};

/// Rebuilds the estimator by refactorising on the referenced training set and
/// checks the stored weights against the recomputed ones.
LoadedCheckpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace lipgp::experiment
