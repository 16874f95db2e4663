#include "lipgp/energy/estimator.hpp"

#include "lipgp/data/dataset.hpp"
#include "lipgp/robot/dynamics.hpp"

#include <fstream>
#include <stdexcept>

namespace lipgp::energy {

namespace {

int clamp_variances(Vec& var, const Vec& prior) {
  int count = 0;
  for (long i = 0; i < var.size(); ++i) {
    if (var(i) >= 0.0) continue;
    if (var(i) < -1e-8 * std::max(1.0, prior(i))) ++count;
    var(i) = 0.0;
  }
  return count;
}

}  // namespace

EnergyPosterior estimate_energies(const gp::TrainedModel& model, const std::vector<robot::JointState>& queries,
                                  std::vector<double> time) {
  const auto* cov = dynamic_cast<const gp::LagrangianCovariance*>(&model.kernel());
  if (cov == nullptr || !cov->op().has_energy_split()) {
    throw UnsupportedOperation("energy estimation requires a Lagrangian kernel with kinetic and potential parts");
  }
  if (!time.empty()) require_dim(static_cast<long>(time.size()), static_cast<long>(queries.size()), "query times");
  EnergyPosterior post;
  post.queries = queries;
  if (time.empty()) {
    time.resize(queries.size());
    for (std::size_t i = 0; i < queries.size(); ++i) time[i] = static_cast<double>(i);
  }
  post.time = std::move(time);
  std::vector<gp::GpSample> qs;
  qs.reserve(queries.size());
  for (const auto& q : queries) qs.push_back({q, Mat()});

  const Mat kt = cov->energy_cross(lip::EnergyPart::Kinetic, qs, model.inputs());
  const Vec pt = cov->energy_prior(lip::EnergyPart::Kinetic, qs);
  model.functional_posterior(kt, pt, post.kinetic_mean, post.kinetic_var);
  const Mat kv = cov->energy_cross(lip::EnergyPart::Potential, qs, model.inputs());
  const Vec pv = cov->energy_prior(lip::EnergyPart::Potential, qs);
  model.functional_posterior(kv, pv, post.potential_mean, post.potential_var);
  post.clamped = clamp_variances(post.kinetic_var, pt) + clamp_variances(post.potential_var, pv);
  return post;
}

void align_offset(EnergyPosterior& post, std::size_t anchor, double reference) {
  if (anchor >= static_cast<std::size_t>(post.potential_mean.size())) {
    throw std::out_of_range("align_offset: anchor index out of range");
  }
  const double shift = post.potential_mean(static_cast<long>(anchor)) - reference;
  post.potential_mean.array() -= shift;
  post.potential_offset += shift;
}

OracleEnergies oracle_energies(const robot::RobotModel& robot, const std::vector<robot::JointState>& queries) {
  OracleEnergies out{Vec(static_cast<long>(queries.size())), Vec(static_cast<long>(queries.size()))};
  for (std::size_t i = 0; i < queries.size(); ++i) {
    const auto e = robot::energies(robot, queries[i].q, queries[i].qd);
    out.kinetic(static_cast<long>(i)) = e.kinetic;
    out.potential(static_cast<long>(i)) = e.potential;
  }
  return out;
}

void write_energy_csv(const EnergyPosterior& post, const std::optional<OracleEnergies>& oracle,
                      const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out << "t,T_mean,T_var,V_mean,V_var";
  if (oracle) out << ",T_oracle,V_oracle";
  out << '\n';
  using data::format_double;
  for (std::size_t i = 0; i < post.size(); ++i) {
    const auto k = static_cast<long>(i);
    out << format_double(post.time[i]) << ',' << format_double(post.kinetic_mean(k)) << ','
        << format_double(post.kinetic_var(k)) << ',' << format_double(post.potential_mean(k)) << ','
        << format_double(post.potential_var(k));
    if (oracle) out << ',' << format_double(oracle->kinetic(k)) << ',' << format_double(oracle->potential(k));
    out << '\n';
  }
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

}  // namespace lipgp::energy
