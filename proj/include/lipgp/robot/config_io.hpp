#pragma once

#include "lipgp/robot/model.hpp"

#include <nlohmann/json.hpp>

#include <filesystem>

namespace lipgp::robot {

/// Robot description file (JSON):
///
///   {
///     "gravity": [0, -9.81, 0],
///     "links": [
///       {"joint": "revolute", "a": 0.5, "alpha": 0, "d": 0, "theta": 0,
///        "mass": 2.0, "com": [-0.25, 0, 0],
///        "inertia": [Ixx, Ixy, Ixz, Iyy, Iyz, Izz],   // about the COM
///        "friction": [fv, fc]}
///     ]
///   }
///
/// "gravity" is optional and defaults to (0, 0, -9.81).
RobotModel robot_from_json(const nlohmann::json& j);
nlohmann::json robot_to_json(const RobotModel& model);
RobotModel load_robot(const std::filesystem::path& path);

}  // namespace lipgp::robot
