#pragma once

#include "lipgp/experiment/config.hpp"
#include "lipgp/experiment/estimators.hpp"
#include "lipgp/experiment/metrics.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace lipgp::experiment {

FitSettings fit_settings(const ExperimentConfig& cfg, const std::string& estimator);

struct RunData {
  data::Dataset train, test;
};

/// Training and test sets of one run. Training torques carry the configured
/// noise; test torques are the noiseless oracle values.
RunData make_run_data(const ExperimentConfig& cfg, const robot::RobotModel& robot, int run);

struct EnergyScores {
  double kinetic = 0.0;        // nMSE (%)
  double potential = 0.0;      // after anchoring at the first test state
  double potential_raw = 0.0;  // without offset removal
  double total = 0.0;          // T + anchored V
  int clamped = 0;
};

/// Energy nMSE of a model with a kinetic/potential split on a test set.
EnergyScores score_energies(const gp::TrainedModel& model, const robot::RobotModel& robot, const data::Dataset& test);

struct RunResult {
  int run = 0;
  std::string estimator;
  bool ok = false;
  std::string error;
  Vec nmse;
  double nmse_avg = 0.0;
  double global_mse = 0.0;
  std::optional<EnergyScores> energy;
  FitReport fit;
  double predict_seconds = 0.0;
};

struct McReport {
  std::vector<RunResult> runs;
  /// Median etc. per estimator of the per-joint nMSE (index j) and of the joint average (index n).
  std::vector<std::pair<std::string, std::vector<Summary>>> summaries;
  const std::vector<Summary>* summary(const std::string& estimator) const;
};

struct CurvePoint {
  std::string estimator;
  int size = 0;
  Summary global_mse;
};

struct DataEfficiencyReport {
  std::vector<RunResult> runs;  // `run` holds the seed index, `fit.iterations` etc. per size
  std::vector<int> sizes;       // size of each entry of `runs`
  std::vector<CurvePoint> curve;
};

/// Fits and evaluates every configured estimator on `runs` fresh train/test
/// pairs. Files: <prefix>_runs.csv, <prefix>_summary.csv, <prefix>_boxplot.gp
/// and <prefix>_report.json (timings; not byte-stable).
McReport run_mc_generalization(const ExperimentConfig& cfg, const std::filesystem::path& out_dir,
                               const std::string& prefix = "mc");

/// Global MSE against nested training subsets of the configured sizes.
DataEfficiencyReport run_data_efficiency(const ExperimentConfig& cfg, const std::filesystem::path& out_dir);

/// MC comparison with the parametric identification baseline added.
McReport run_id_baseline(const ExperimentConfig& cfg, const std::filesystem::path& out_dir);

/// Nested subset of `size` rows: the first `size` entries of a seeded
/// permutation, returned in ascending order.
std::vector<int> nested_subset(int total, int size, std::uint64_t seed);

/// Minimal CSV table helpers (no quoting; fields must not contain commas).
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};
void write_csv(const CsvTable& t, const std::filesystem::path& path);
CsvTable read_csv(const std::filesystem::path& path);

}  // namespace lipgp::experiment
