#pragma once

#include "lipgp/data/dataset.hpp"
#include "lipgp/gp/model.hpp"

#include <nlohmann/json.hpp>

#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace lipgp::experiment {

/// lip, se, lse, sp, lip+friction, se+friction, lse+friction, gip-standin, id
const std::vector<std::string>& registered_estimators();
bool is_registered_estimator(const std::string& name);

struct FitSettings {
  gp::OptimizerOptions optimizer;
  bool learn_noise = true;  // otherwise pinned to the dataset's sigma_e (floored)
  double noise_floor = 1e-6;
  int max_optimization_samples = 0;
  double id_ridge = 1e-8;
  std::optional<Vec> initial_log_params;  // kernel parameters, applied to every per-joint model
  /// Warm start: full [kernel, noise] vectors per model, overriding the above.
  std::vector<Vec> warm_start;
};

struct FitReport {
  double seconds = 0.0;
  int iterations = 0;
  int warnings = 0;
  std::vector<std::string> messages;
};

/// A torque predictor trained on a dataset.
class Estimator {
 public:
  virtual ~Estimator() = default;
  virtual std::string name() const = 0;
  virtual FitReport fit(const data::Dataset& train, const FitSettings& settings) = 0;
  /// Predicted torques (N x n) and, if requested and available, variances.
  virtual Mat predict(const std::vector<robot::JointState>& xs, Mat* variance = nullptr) const = 0;
  /// Model with a kinetic/potential split (energy estimation), or null.
  virtual const gp::TrainedModel* lagrangian_model() const { return nullptr; }
  /// Fitted [kernel, noise] vectors per model (empty for non-GP estimators).
  virtual std::vector<Vec> hyperparameters() const { return {}; }
  virtual nlohmann::json to_checkpoint() const = 0;
  /// Restores a fitted state from a checkpoint and the dataset it was trained on.
  virtual void from_checkpoint(const nlohmann::json& j, const data::Dataset& train) = 0;
};

std::unique_ptr<Estimator> make_estimator(const std::string& name, const robot::RobotModel& robot);

/// Samples fed to GP kernels; regressor matrices are attached only when needed.
std::vector<gp::GpSample> to_samples(const std::vector<robot::JointState>& xs, const robot::RobotModel* robot);

}  // namespace lipgp::experiment
