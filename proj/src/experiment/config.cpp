#include "lipgp/experiment/config.hpp"

#include "lipgp/data/dataset.hpp"
#include "lipgp/data/random.hpp"
#include "lipgp/experiment/estimators.hpp"
#include "lipgp/robot/config_io.hpp"

#include <fstream>

namespace lipgp::experiment {

using nlohmann::json;

namespace {

Vec vec_from(const json& j, int n, const char* what) {
  if (j.is_number()) return Vec::Constant(n, j.get<double>());
  if (!j.is_array()) throw ConfigError(std::string(what) + " must be a number or an array");
  if (static_cast<int>(j.size()) != n) {
    throw ConfigError(std::string(what) + " must have one entry per joint (" + std::to_string(n) + ")");
  }
  Vec v(n);
  for (int i = 0; i < n; ++i) v(i) = j[static_cast<std::size_t>(i)].get<double>();
  return v;
}

std::vector<double> to_std(const Vec& v) { return {v.data(), v.data() + v.size()}; }

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
  if (p.empty()) return {};
  const std::filesystem::path path(p);
  return path.is_absolute() || base.empty() ? path : base / path;
}

}  // namespace

std::uint64_t run_seed(std::uint64_t seed, int run, int purpose) {
  return data::mix_seed(seed, static_cast<std::uint64_t>(run) * 16u + static_cast<std::uint64_t>(purpose));
}

robot::RobotModel ExperimentConfig::robot() const {
  if (robot_json.is_null()) throw ConfigError("config: no robot given");
  return robot::robot_from_json(robot_json);
}

int ExperimentConfig::dof() const { return robot().dof(); }

void ExperimentConfig::validate() const {
  const int n = dof();
  if (runs < 1) throw ConfigError("config: runs must be >= 1");
  if (estimators.empty()) throw ConfigError("config: at least one estimator required");
  for (const auto& e : estimators) {
    if (!is_registered_estimator(e)) throw ConfigError("config: unknown estimator '" + e + "'");
  }
  if (limits.dof() != n) throw ConfigError("config: joint limits do not match the robot");
  try {
    limits.validate();
    train_trajectory.validate();
    test_trajectory.validate();
  } catch (const std::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  if (noise_sigma.size() != n || (noise_sigma.array() < 0.0).any()) {
    throw ConfigError("config: noise_sigma must be non-negative, one entry per joint");
  }
  for (int s : train_sizes) {
    if (s < 1) throw ConfigError("config: training sizes must be positive");
    if (s > train_trajectory.num_samples()) {
      throw ConfigError("config: training size " + std::to_string(s) + " exceeds the training trajectory length " +
                        std::to_string(train_trajectory.num_samples()));
    }
  }
  if (max_optimization_samples < 0) throw ConfigError("config: max_optimization_samples must be >= 0");
  if (!(noise_floor > 0.0)) throw ConfigError("config: noise floor must be positive");
  if (optimizer.max_iterations < 0) throw ConfigError("config: optimizer.max_iterations must be >= 0");
  if (!(id_ridge >= 0.0)) throw ConfigError("config: id_ridge must be >= 0");
}

json ExperimentConfig::to_json() const {
  json j;
  j["robot"] = robot_json;
  if (!robot_name.empty()) j["robot_name"] = robot_name;
  j["estimators"] = estimators;
  j["trajectory"] = {{"train", data::sinusoid_to_json(train_trajectory)},
                     {"test", data::sinusoid_to_json(test_trajectory)}};
  j["limits"] = {{"q_min", to_std(limits.q_min)},
                 {"q_max", to_std(limits.q_max)},
                 {"qd_max", to_std(limits.qd_max)},
                 {"qdd_max", to_std(limits.qdd_max)}};
  j["noise_sigma"] = to_std(noise_sigma);
  j["include_friction"] = include_friction;
  j["runs"] = runs;
  j["seed"] = seed;
  j["train_sizes"] = train_sizes;
  j["optimizer"] = {{"max_iterations", optimizer.max_iterations},
                    {"grad_tolerance", optimizer.grad_tolerance},
                    {"f_tolerance", optimizer.f_tolerance},
                    {"fd_step", optimizer.fd_step}};
  j["noise"] = {{"learn", learn_noise}, {"floor", noise_floor}};
  j["max_optimization_samples"] = max_optimization_samples;
  json init = json::object();
  for (const auto& [k, v] : initial_log_params) init[k] = to_std(v);
  j["initial_log_params"] = init;
  j["workers"] = workers;
  j["id_ridge"] = id_ridge;
  if (!dataset.empty()) j["dataset"] = dataset.string();
  if (!test_dataset.empty()) j["test_dataset"] = test_dataset.string();
  if (!checkpoint.empty()) j["checkpoint"] = checkpoint.string();
  j["output_dir"] = output_dir.string();
  return j;
}

ExperimentConfig config_from_json(const json& j, const std::filesystem::path& base_dir) {
  if (!j.is_object()) throw ConfigError("config: top level must be an object");
  ExperimentConfig c;
  c.base_dir = base_dir;
  try {
    if (j.contains("robot")) {
      const auto& r = j.at("robot");
      if (r.is_string()) {
        const auto path = resolve(base_dir, r.get<std::string>());
        std::ifstream in(path);
        if (!in) throw ConfigError("config: cannot open robot file " + path.string());
        c.robot_json = json::parse(in);
        c.robot_name = path.stem().string();
      } else {
        c.robot_json = r;
      }
    }
    c.robot_name = j.value("robot_name", c.robot_name);
    const int n = c.robot_json.is_null() ? 0 : c.robot().dof();

    if (j.contains("estimators")) c.estimators = j.at("estimators").get<std::vector<std::string>>();
    if (j.contains("estimator")) c.estimators = {j.at("estimator").get<std::string>()};
    if (j.contains("trajectory")) {
      const auto& t = j.at("trajectory");
      if (t.contains("train")) c.train_trajectory = data::sinusoid_from_json(t.at("train"));
      c.test_trajectory = t.contains("test") ? data::sinusoid_from_json(t.at("test")) : c.train_trajectory;
    }
    if (n > 0) {
      if (j.contains("limits")) {
        const auto& l = j.at("limits");
        if (l.contains("q_min")) {
          c.limits = {vec_from(l.at("q_min"), n, "limits.q_min"), vec_from(l.at("q_max"), n, "limits.q_max"),
                      vec_from(l.at("qd_max"), n, "limits.qd_max"), vec_from(l.at("qdd_max"), n, "limits.qdd_max")};
        } else {
          const Vec q = vec_from(l.at("q"), n, "limits.q");
          c.limits = {-q, q, vec_from(l.at("qd"), n, "limits.qd"), vec_from(l.at("qdd"), n, "limits.qdd")};
        }
      } else {
        c.limits = data::JointLimits::uniform(n, 2.5, 3.0, 8.0);
      }
      c.noise_sigma = j.contains("noise_sigma") ? vec_from(j.at("noise_sigma"), n, "noise_sigma") : Vec::Zero(n);
    }
    c.include_friction = j.value("include_friction", false);
    c.runs = j.value("runs", c.runs);
    c.seed = j.value("seed", c.seed);
    if (j.contains("train_sizes")) c.train_sizes = j.at("train_sizes").get<std::vector<int>>();
    if (j.contains("optimizer")) {
      const auto& o = j.at("optimizer");
      c.optimizer.max_iterations = o.value("max_iterations", c.optimizer.max_iterations);
      c.optimizer.grad_tolerance = o.value("grad_tolerance", c.optimizer.grad_tolerance);
      c.optimizer.f_tolerance = o.value("f_tolerance", c.optimizer.f_tolerance);
      c.optimizer.fd_step = o.value("fd_step", c.optimizer.fd_step);
    }
    if (j.contains("noise")) {
      c.learn_noise = j.at("noise").value("learn", c.learn_noise);
      c.noise_floor = j.at("noise").value("floor", c.noise_floor);
    }
    c.max_optimization_samples = j.value("max_optimization_samples", 0);
    if (j.contains("initial_log_params")) {
      for (const auto& [k, v] : j.at("initial_log_params").items()) {
        const auto vals = v.get<std::vector<double>>();
        c.initial_log_params[k] = Eigen::Map<const Vec>(vals.data(), static_cast<long>(vals.size()));
      }
    }
    c.workers = j.value("workers", 0);
    c.id_ridge = j.value("id_ridge", c.id_ridge);
    c.dataset = resolve(base_dir, j.value("dataset", std::string{}));
    c.test_dataset = resolve(base_dir, j.value("test_dataset", std::string{}));
    c.checkpoint = resolve(base_dir, j.value("checkpoint", std::string{}));
    if (j.contains("output_dir")) c.output_dir = j.at("output_dir").get<std::string>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw ConfigError("config " + path.string() + ": " + e.what());
  }
  return config_from_json(j, path.parent_path());
}

}  // namespace lipgp::experiment
