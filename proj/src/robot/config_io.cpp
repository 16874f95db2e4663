#include "lipgp/robot/config_io.hpp"

#include <fstream>

namespace lipgp::robot {

using nlohmann::json;

namespace {

Vec3 vec3_from(const json& j, const char* what) {
  if (!j.is_array() || j.size() != 3) throw std::invalid_argument(std::string(what) + " must be a 3-vector");
  return Vec3(j[0].get<double>(), j[1].get<double>(), j[2].get<double>());
}

}  // namespace

RobotModel robot_from_json(const json& j) {
  const Vec3 gravity = j.contains("gravity") ? vec3_from(j.at("gravity"), "gravity") : default_gravity();
  std::vector<Link> links;
  for (const auto& lj : j.at("links")) {
    Link link;
    const std::string kind = lj.value("joint", "revolute");
    if (kind == "revolute") {
      link.dh.kind = JointKind::Revolute;
    } else if (kind == "prismatic") {
      link.dh.kind = JointKind::Prismatic;
    } else {
      throw std::invalid_argument("unknown joint kind '" + kind + "'");
    }
    link.dh.a = lj.value("a", 0.0);
    link.dh.alpha = lj.value("alpha", 0.0);
    link.dh.d0 = lj.value("d", 0.0);
    link.dh.theta0 = lj.value("theta", 0.0);
    link.inertial.mass = lj.at("mass").get<double>();
    link.inertial.com = lj.contains("com") ? vec3_from(lj.at("com"), "com") : Vec3::Zero();
    if (lj.contains("inertia")) {
      const auto& in = lj.at("inertia");
      if (!in.is_array() || in.size() != 6) throw std::invalid_argument("inertia must have 6 entries");
      const double ixx = in[0], ixy = in[1], ixz = in[2], iyy = in[3], iyz = in[4], izz = in[5];
      link.inertial.inertia << ixx, ixy, ixz, ixy, iyy, iyz, ixz, iyz, izz;
    }
    if (lj.contains("friction")) {
      const auto& f = lj.at("friction");
      if (!f.is_array() || f.size() != 2) throw std::invalid_argument("friction must be [fv, fc]");
      link.inertial.viscous = f[0];
      link.inertial.coulomb = f[1];
    }
    links.push_back(link);
  }
  return RobotModel(std::move(links), gravity);
}

json robot_to_json(const RobotModel& model) {
  json j;
  const Vec3& g = model.gravity();
  j["gravity"] = {g.x(), g.y(), g.z()};
  j["links"] = json::array();
  for (const auto& l : model.links()) {
    const auto& in = l.inertial.inertia;
    j["links"].push_back({
        {"joint", l.dh.kind == JointKind::Revolute ? "revolute" : "prismatic"},
        {"a", l.dh.a},
        {"alpha", l.dh.alpha},
        {"d", l.dh.d0},
        {"theta", l.dh.theta0},
        {"mass", l.inertial.mass},
        {"com", {l.inertial.com.x(), l.inertial.com.y(), l.inertial.com.z()}},
        {"inertia", {in(0, 0), in(0, 1), in(0, 2), in(1, 1), in(1, 2), in(2, 2)}},
        {"friction", {l.inertial.viscous, l.inertial.coulomb}},
    });
  }
  return j;
}

RobotModel load_robot(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open robot file " + path.string());
  return robot_from_json(json::parse(in));
}

}  // namespace lipgp::robot
