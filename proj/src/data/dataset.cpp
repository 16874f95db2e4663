#include "lipgp/data/dataset.hpp"

#include "lipgp/data/random.hpp"
#include "lipgp/robot/dynamics.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

namespace lipgp::data {

using nlohmann::json;

void Dataset::validate() const {
  if (static_cast<long>(inputs.size()) != torques.rows()) throw DimensionError("dataset: |X| != rows(Y)");
  if (time.size() != inputs.size()) throw DimensionError("dataset: time column length mismatch");
  if (sigma_e.size() != torques.cols()) throw DimensionError("dataset: sigma_e length mismatch");
}

Dataset Dataset::subset(const std::vector<int>& rows) const {
  Dataset out;
  out.sigma_e = sigma_e;
  out.torques.resize(static_cast<long>(rows.size()), torques.cols());
  for (std::size_t k = 0; k < rows.size(); ++k) {
    const auto r = static_cast<std::size_t>(rows[k]);
    out.time.push_back(time.at(r));
    out.inputs.push_back(inputs.at(r));
    out.torques.row(static_cast<long>(k)) = torques.row(rows[k]);
  }
  return out;
}

Dataset synthesize_dataset(const robot::RobotModel& model, const Trajectory& traj, const Vec& sigma_e,
                           bool include_friction, std::uint64_t seed) {
  const int n = model.dof();
  require_dim(sigma_e.size(), n, "sigma_e");
  if ((sigma_e.array() < 0.0).any()) throw std::invalid_argument("sigma_e must be non-negative");
  Rng rng(seed);
  Dataset d;
  d.time = traj.time;
  d.inputs = traj.states;
  d.sigma_e = sigma_e;
  d.torques.resize(static_cast<long>(traj.size()), n);
  for (std::size_t k = 0; k < traj.size(); ++k) {
    const Vec tau = robot::inverse_dynamics(model, traj.states[k], include_friction);
    for (int i = 0; i < n; ++i) {
      // always draw so the noise stream does not depend on which joints are noiseless
      const double e = rng.normal();
      d.torques(static_cast<long>(k), i) = tau(i) + sigma_e(i) * e;
    }
  }
  return d;
}

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

double parse_double(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
    throw std::invalid_argument("cannot parse number '" + std::string(s) + "'");
  }
  return v;
}

void write_dataset_csv(const Dataset& d, const std::filesystem::path& path) {
  d.validate();
  const int n = d.dof();
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << "t";
  for (const char* prefix : {"q", "qd", "qdd", "tau"}) {
    for (int i = 1; i <= n; ++i) out << ',' << prefix << i;
  }
  out << '\n';
  for (int k = 0; k < d.size(); ++k) {
    const auto& s = d.inputs[static_cast<std::size_t>(k)];
    out << format_double(d.time[static_cast<std::size_t>(k)]);
    for (const Vec* v : {&s.q, &s.qd, &s.qdd}) {
      for (int i = 0; i < n; ++i) out << ',' << format_double((*v)(i));
    }
    for (int i = 0; i < n; ++i) out << ',' << format_double(d.torques(k, i));
    out << '\n';
  }
}

Dataset read_dataset_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error(path.string() + ": empty file");
  std::size_t columns = 1;
  for (char ch : line) columns += ch == ',';
  if (columns < 5 || (columns - 1) % 4 != 0) throw std::runtime_error(path.string() + ": malformed header");
  const int n = static_cast<int>((columns - 1) / 4);

  Dataset d;
  d.sigma_e = Vec::Zero(n);
  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    if (line.empty() || line == "\r") continue;
    std::vector<double> row;
    row.reserve(columns);
    std::string_view rest(line);
    while (true) {
      const auto comma = rest.find(',');
      row.push_back(parse_double(rest.substr(0, comma)));
      if (comma == std::string_view::npos) break;
      rest.remove_prefix(comma + 1);
    }
    if (row.size() != columns) throw std::runtime_error(path.string() + ": row with wrong column count");
    rows.push_back(std::move(row));
  }
  d.torques.resize(static_cast<long>(rows.size()), n);
  for (std::size_t k = 0; k < rows.size(); ++k) {
    const auto& r = rows[k];
    robot::JointState s{Vec(n), Vec(n), Vec(n)};
    for (int i = 0; i < n; ++i) {
      const auto ui = static_cast<std::size_t>(i), un = static_cast<std::size_t>(n);
      s.q(i) = r[1 + ui];
      s.qd(i) = r[1 + un + ui];
      s.qdd(i) = r[1 + 2 * un + ui];
      d.torques(static_cast<long>(k), i) = r[1 + 3 * un + ui];
    }
    d.time.push_back(r[0]);
    d.inputs.push_back(std::move(s));
  }
  const auto meta = metadata_path(path);
  if (std::filesystem::exists(meta)) {
    const auto m = read_metadata(path);
    if (m.sigma_e.size() == n) d.sigma_e = m.sigma_e;
  }
  return d;
}

std::filesystem::path metadata_path(const std::filesystem::path& csv) {
  auto p = csv;
  p += ".meta.json";
  return p;
}

json sinusoid_to_json(const SinusoidSpec& s) {
  return json{{"harmonics", s.harmonics},     {"omega_f", s.omega_f},   {"amplitude", s.amplitude},
              {"seed", s.seed},               {"duration", s.duration}, {"sample_rate", s.sample_rate}};
}

SinusoidSpec sinusoid_from_json(const json& j) {
  SinusoidSpec s;
  s.harmonics = j.value("harmonics", s.harmonics);
  s.omega_f = j.value("omega_f", s.omega_f);
  s.amplitude = j.value("amplitude", s.amplitude);
  s.seed = j.value("seed", s.seed);
  s.duration = j.value("duration", s.duration);
  s.sample_rate = j.value("sample_rate", s.sample_rate);
  return s;
}

void write_metadata(const DatasetMetadata& meta, const std::filesystem::path& csv) {
  json j;
  j["seed"] = meta.seed;
  j["sigma_e"] = std::vector<double>(meta.sigma_e.data(), meta.sigma_e.data() + meta.sigma_e.size());
  j["include_friction"] = meta.include_friction;
  j["trajectory"] = sinusoid_to_json(meta.trajectory);
  j["robot"] = meta.robot;
  std::ofstream out(metadata_path(csv), std::ios::binary);
  if (!out) throw std::runtime_error("cannot write metadata for " + csv.string());
  out << j.dump(2) << '\n';
}

DatasetMetadata read_metadata(const std::filesystem::path& csv) {
  std::ifstream in(metadata_path(csv));
  if (!in) throw std::runtime_error("cannot open metadata for " + csv.string());
  const json j = json::parse(in);
  DatasetMetadata m;
  m.seed = j.value("seed", std::uint64_t{0});
  const auto sig = j.value("sigma_e", std::vector<double>{});
  m.sigma_e = Eigen::Map<const Vec>(sig.data(), static_cast<long>(sig.size()));
  m.include_friction = j.value("include_friction", false);
  if (j.contains("trajectory")) m.trajectory = sinusoid_from_json(j.at("trajectory"));
  m.robot = j.value("robot", std::string{});
  return m;
}

}  // namespace lipgp::data
