#pragma once

#include "lipgp/gp/model.hpp"

#include <filesystem>
#include <optional>
#include <vector>

namespace lipgp::energy {

struct EnergyPosterior {
  std::vector<double> time;
  std::vector<robot::JointState> queries;
  Vec kinetic_mean, kinetic_var;
  Vec potential_mean, potential_var;
  double potential_offset = 0.0;  // total shift applied by align_offset
  int clamped = 0;                // variances below -1e-8 (scaled) that were clamped to 0

  std::size_t size() const { return queries.size(); }
};

/// E[T | D], E[V | D] and their variances at the query states. Requires a model
/// trained with a kernel split into kinetic and potential parts.
EnergyPosterior estimate_energies(const gp::TrainedModel& model, const std::vector<robot::JointState>& queries,
                                  std::vector<double> time = {});

/// Shifts the potential estimate so that it equals `reference` at query `anchor`.
void align_offset(EnergyPosterior& post, std::size_t anchor, double reference);

/// Oracle energies along the queries (kinetic, potential).
struct OracleEnergies {
  Vec kinetic, potential;
};
OracleEnergies oracle_energies(const robot::RobotModel& robot, const std::vector<robot::JointState>& queries);

/// CSV `t,T_mean,T_var,V_mean,V_var[,T_oracle,V_oracle]`.
void write_energy_csv(const EnergyPosterior& post, const std::optional<OracleEnergies>& oracle,
                      const std::filesystem::path& path);

}  // namespace lipgp::energy
