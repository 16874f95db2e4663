#include "lipgp/experiment/checkpoint.hpp"

#include "lipgp/robot/config_io.hpp"

#include <fstream>
#include <stdexcept>

namespace lipgp::experiment {

using nlohmann::json;

namespace {
constexpr const char* kFormat = "lipgp-checkpoint";
constexpr int kVersion = 1;
}  // namespace

void save_checkpoint(const Estimator& est, const robot::RobotModel& robot, const std::filesystem::path& training_set,
                     const std::filesystem::path& path) {
  json j = est.to_checkpoint();
  j["format"] = kFormat;
  j["version"] = kVersion;
  j["robot"] = robot::robot_to_json(robot);
  const auto dir = path.parent_path().empty() ? std::filesystem::path(".") : path.parent_path();
  std::error_code ec;
  auto rel = std::filesystem::relative(training_set, dir, ec);
  j["training_set"] = (ec || rel.empty() ? training_set : rel).generic_string();
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write checkpoint " + path.string());
  out << j.dump(2) << '\n';
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

LoadedCheckpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open checkpoint " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw std::runtime_error("checkpoint " + path.string() + ": " + e.what());
  }
  if (j.value("format", std::string{}) != kFormat || j.value("version", 0) != kVersion) {
    throw std::runtime_error("checkpoint " + path.string() + ": unsupported format");
  }
  auto robot = robot::robot_from_json(j.at("robot"));
  std::filesystem::path ts = j.at("training_set").get<std::string>();
  if (ts.is_relative()) ts = path.parent_path() / ts;
  auto train = data::read_dataset_csv(ts);
  auto est = make_estimator(j.at("estimator").get<std::string>(), robot);
  est->from_checkpoint(j, train);
  return LoadedCheckpoint{std::move(est), std::move(robot), ts, std::move(train)};
}

}  // namespace lipgp::experiment
