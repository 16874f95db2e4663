#include "lipgp/experiment/runner.hpp"

#include "lipgp/data/random.hpp"
#include "lipgp/energy/estimator.hpp"
#include "lipgp/parallel.hpp"
#include "lipgp/simd/kernels.hpp"

#include <algorithm>
#include <chrono>
#include <fstream>
#include <numeric>
#include <sstream>

namespace lipgp::experiment {

using nlohmann::json;
using data::format_double;

namespace {

std::string opt_double(const std::optional<double>& v) { return v ? format_double(*v) : std::string{}; }

// CSV fields must not contain separators or line breaks.
std::string sanitize(std::string s) {
  for (char& c : s) {
    if (c == ',' || c == '\n' || c == '\r') c = ';';
  }
  return s;
}

void ensure_dir(const std::filesystem::path& dir) {
  if (!dir.empty()) std::filesystem::create_directories(dir);
}

RunResult evaluate(Estimator& est, const data::Dataset& train, const data::Dataset& test,
                   const robot::RobotModel& robot, const FitSettings& settings, int run) {
  RunResult r;
  r.run = run;
  r.estimator = est.name();
  try {
    r.fit = est.fit(train, settings);
    const auto t0 = std::chrono::steady_clock::now();
    const Mat pred = est.predict(test.inputs);
    r.predict_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (!pred.allFinite()) throw std::runtime_error("non-finite predictions");
    r.nmse = nmse_percent(pred, test.torques);
    r.nmse_avg = r.nmse.mean();
    r.global_mse = global_mse(pred, test.torques);
    if (const auto* m = est.lagrangian_model()) r.energy = score_energies(*m, robot, test);
    r.ok = true;
  } catch (const std::exception& e) {
    r.ok = false;
    r.error = e.what();
  }
  return r;
}

json fit_json(const RunResult& r) {
  return json{{"run", r.run},
              {"estimator", r.estimator},
              {"ok", r.ok},
              {"error", r.error},
              {"fit_seconds", r.fit.seconds},
              {"predict_seconds", r.predict_seconds},
              {"iterations", r.fit.iterations},
              {"optimizer_warnings", r.fit.warnings},
              {"messages", r.fit.messages},
              {"energy_variances_clamped", r.energy ? r.energy->clamped : 0}};
}

void write_json(const json& j, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << j.dump(2) << '\n';
}

std::vector<std::string> metric_names(int n, bool with_energy) {
  std::vector<std::string> names;
  for (int j = 0; j < n; ++j) names.push_back("nmse_" + std::to_string(j + 1));
  names.emplace_back("nmse_avg");
  names.emplace_back("global_mse");
  if (with_energy) {
    names.emplace_back("T_nmse");
    names.emplace_back("V_nmse");
    names.emplace_back("V_nmse_raw");
    names.emplace_back("E_nmse");
  }
  return names;
}

std::vector<std::optional<double>> metric_values(const RunResult& r, int n) {
  std::vector<std::optional<double>> v;
  for (int j = 0; j < n; ++j) v.emplace_back(r.ok ? std::optional<double>(r.nmse(j)) : std::nullopt);
  v.emplace_back(r.ok ? std::optional<double>(r.nmse_avg) : std::nullopt);
  v.emplace_back(r.ok ? std::optional<double>(r.global_mse) : std::nullopt);
  const bool e = r.ok && r.energy.has_value();
  v.emplace_back(e ? std::optional<double>(r.energy->kinetic) : std::nullopt);
  v.emplace_back(e ? std::optional<double>(r.energy->potential) : std::nullopt);
  v.emplace_back(e ? std::optional<double>(r.energy->potential_raw) : std::nullopt);
  v.emplace_back(e ? std::optional<double>(r.energy->total) : std::nullopt);
  return v;
}

void write_boxplot_stub(const std::filesystem::path& path, const std::string& runs_csv, int n) {
  std::ofstream out(path, std::ios::binary);
  out << "# Box plot of the joint-averaged torque nMSE per estimator.\n"
      << "# usage: gnuplot -p " << path.filename().string() << "\n"
      << "set datafile separator ','\n"
      << "set style fill solid 0.25 border -1\n"
      << "set style boxplot outliers pointtype 7\n"
      << "set style data boxplot\n"
      << "set logscale y\n"
      << "set ylabel 'nMSE [%]'\n"
      << "unset key\n"
      << "plot '" << runs_csv << "' skip 1 using (1):" << 4 + n << ":(0.5):2\n";
}

}  // namespace

FitSettings fit_settings(const ExperimentConfig& cfg, const std::string& estimator) {
  FitSettings s;
  s.optimizer = cfg.optimizer;
  s.learn_noise = cfg.learn_noise;
  s.noise_floor = cfg.noise_floor;
  s.max_optimization_samples = cfg.max_optimization_samples;
  s.id_ridge = cfg.id_ridge;
  if (auto it = cfg.initial_log_params.find(estimator); it != cfg.initial_log_params.end()) {
    s.initial_log_params = it->second;
  }
  return s;
}

RunData make_run_data(const ExperimentConfig& cfg, const robot::RobotModel& robot, int run) {
  auto train_spec = cfg.train_trajectory;
  auto test_spec = cfg.test_trajectory;
  train_spec.seed = run_seed(cfg.seed, run, 0);
  test_spec.seed = run_seed(cfg.seed, run, 1);
  const int n = robot.dof();
  RunData d;
  d.train = data::synthesize_dataset(robot, data::generate_trajectory(train_spec, cfg.limits, n), cfg.noise_sigma,
                                     cfg.include_friction, run_seed(cfg.seed, run, 2));
  d.test = data::synthesize_dataset(robot, data::generate_trajectory(test_spec, cfg.limits, n), Vec::Zero(n),
                                    cfg.include_friction, run_seed(cfg.seed, run, 3));
  return d;
}

EnergyScores score_energies(const gp::TrainedModel& model, const robot::RobotModel& robot, const data::Dataset& test) {
  const auto raw = energy::estimate_energies(model, test.inputs, test.time);
  const auto oracle = energy::oracle_energies(robot, test.inputs);
  auto aligned = raw;
  energy::align_offset(aligned, 0, oracle.potential(0));
  EnergyScores s;
  s.kinetic = nmse_percent(aligned.kinetic_mean, oracle.kinetic);
  s.potential = nmse_percent(aligned.potential_mean, oracle.potential);
  s.potential_raw = nmse_percent(raw.potential_mean, oracle.potential);
  s.total = nmse_percent(Vec(aligned.kinetic_mean + aligned.potential_mean), Vec(oracle.kinetic + oracle.potential));
  s.clamped = raw.clamped;
  return s;
}

const std::vector<Summary>* McReport::summary(const std::string& estimator) const {
  for (const auto& [name, s] : summaries) {
    if (name == estimator) return &s;
  }
  return nullptr;
}

McReport run_mc_generalization(const ExperimentConfig& cfg, const std::filesystem::path& out_dir,
                               const std::string& prefix) {
  cfg.validate();
  const auto robot = cfg.robot();
  const int n = robot.dof();
  const auto ne = cfg.estimators.size();
  McReport report;
  report.runs.resize(static_cast<std::size_t>(cfg.runs) * ne);
  const auto t0 = std::chrono::steady_clock::now();
  parallel_for(
      static_cast<std::size_t>(cfg.runs),
      [&](std::size_t lo, std::size_t hi, int) {
        for (std::size_t run = lo; run < hi; ++run) {
          RunData d;
          std::string data_error;
          try {
            d = make_run_data(cfg, robot, static_cast<int>(run));
          } catch (const std::exception& e) {
            data_error = e.what();
          }
          for (std::size_t e = 0; e < ne; ++e) {
            auto& slot = report.runs[run * ne + e];
            if (!data_error.empty()) {
              slot.run = static_cast<int>(run);
              slot.estimator = cfg.estimators[e];
              slot.error = "data generation failed: " + data_error;
              continue;
            }
            auto est = make_estimator(cfg.estimators[e], robot);
            slot = evaluate(*est, d.train, d.test, robot, fit_settings(cfg, cfg.estimators[e]), static_cast<int>(run));
          }
        }
      },
      cfg.workers);
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  const bool any_energy = std::any_of(report.runs.begin(), report.runs.end(), [](const RunResult& r) { return r.energy.has_value(); });
  const auto names = metric_names(n, any_energy);
  const std::size_t shown = names.size();

  CsvTable runs;
  runs.header = {"run", "estimator", "status"};
  runs.header.insert(runs.header.end(), names.begin(), names.end());
  runs.header.emplace_back("message");
  for (const auto& r : report.runs) {
    std::vector<std::string> row{std::to_string(r.run), r.estimator, r.ok ? "ok" : "error"};
    const auto vals = metric_values(r, n);
    for (std::size_t k = 0; k < shown; ++k) row.push_back(opt_double(vals[k]));
    row.push_back(sanitize(r.error));
    runs.rows.push_back(std::move(row));
  }

  CsvTable summary;
  summary.header = {"estimator", "metric", "count", "median", "q1", "q3", "min", "max"};
  for (const auto& est : cfg.estimators) {
    std::vector<Summary> per_metric;
    for (std::size_t k = 0; k < shown; ++k) {
      std::vector<double> vals;
      for (const auto& r : report.runs) {
        if (r.estimator != est) continue;
        const auto v = metric_values(r, n)[k];
        if (v) vals.push_back(*v);
      }
      if (vals.empty() && k >= static_cast<std::size_t>(n + 2)) continue;
      const auto s = summarize(vals);
      if (k <= static_cast<std::size_t>(n)) per_metric.push_back(s);
      summary.rows.push_back({est, names[k], std::to_string(s.count), format_double(s.median), format_double(s.q1),
                              format_double(s.q3), format_double(s.min), format_double(s.max)});
    }
    report.summaries.emplace_back(est, per_metric);
  }

  ensure_dir(out_dir);
  write_csv(runs, out_dir / (prefix + "_runs.csv"));
  write_csv(summary, out_dir / (prefix + "_summary.csv"));
  write_boxplot_stub(out_dir / (prefix + "_boxplot.gp"), prefix + "_runs.csv", n);
  json rep;
  rep["note"] = "desk-scale study: " + std::to_string(n) + "-DOF oracle, " + std::to_string(cfg.runs) + " runs";
  rep["isa"] = simd::isa_name(simd::active_isa());
  rep["wall_seconds"] = wall;
  rep["config"] = cfg.to_json();
  rep["runs"] = json::array();
  for (const auto& r : report.runs) rep["runs"].push_back(fit_json(r));
  write_json(rep, out_dir / (prefix + "_report.json"));
  return report;
}

McReport run_id_baseline(const ExperimentConfig& cfg, const std::filesystem::path& out_dir) {
  auto c = cfg;
  if (std::find(c.estimators.begin(), c.estimators.end(), "id") == c.estimators.end()) c.estimators.push_back("id");
  return run_mc_generalization(c, out_dir, "id");
}

std::vector<int> nested_subset(int total, int size, std::uint64_t seed) {
  if (size < 0 || size > total) throw std::invalid_argument("subset size out of range");
  std::vector<int> perm(static_cast<std::size_t>(total));
  std::iota(perm.begin(), perm.end(), 0);
  data::Rng rng(seed);
  for (int i = total - 1; i > 0; --i) {
    const auto j = static_cast<int>(rng.uniform() * (i + 1));
    std::swap(perm[static_cast<std::size_t>(i)], perm[static_cast<std::size_t>(std::min(j, i))]);
  }
  std::vector<int> out(perm.begin(), perm.begin() + size);
  std::sort(out.begin(), out.end());
  return out;
}

DataEfficiencyReport run_data_efficiency(const ExperimentConfig& cfg, const std::filesystem::path& out_dir) {
  cfg.validate();
  if (cfg.train_sizes.empty()) throw ConfigError("config: data-efficiency needs train_sizes");
  const auto robot = cfg.robot();
  const int n = robot.dof();
  auto sizes = cfg.train_sizes;
  std::sort(sizes.begin(), sizes.end());
  const auto ne = cfg.estimators.size(), ns = sizes.size();
  DataEfficiencyReport report;
  report.runs.resize(static_cast<std::size_t>(cfg.runs) * ne * ns);
  report.sizes.resize(report.runs.size());
  const auto t0 = std::chrono::steady_clock::now();
  parallel_for(
      static_cast<std::size_t>(cfg.runs),
      [&](std::size_t lo, std::size_t hi, int) {
        for (std::size_t run = lo; run < hi; ++run) {
          const auto d = make_run_data(cfg, robot, static_cast<int>(run));
          const std::uint64_t subset_seed = run_seed(cfg.seed, static_cast<int>(run), 4);
          for (std::size_t e = 0; e < ne; ++e) {
            std::vector<Vec> warm;
            for (std::size_t s = 0; s < ns; ++s) {
              const std::size_t idx = (run * ne + e) * ns + s;
              const auto rows = nested_subset(d.train.size(), sizes[s], subset_seed);
              auto settings = fit_settings(cfg, cfg.estimators[e]);
              settings.warm_start = warm;
              auto est = make_estimator(cfg.estimators[e], robot);
              report.runs[idx] = evaluate(*est, d.train.subset(rows), d.test, robot, settings, static_cast<int>(run));
              report.sizes[idx] = sizes[s];
              if (report.runs[idx].ok) warm = est->hyperparameters();
            }
          }
        }
      },
      cfg.workers);
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  CsvTable runs;
  runs.header = {"seed_index", "size", "estimator", "status", "global_mse"};
  for (int j = 0; j < n; ++j) runs.header.push_back("nmse_" + std::to_string(j + 1));
  runs.header.emplace_back("message");
  for (std::size_t i = 0; i < report.runs.size(); ++i) {
    const auto& r = report.runs[i];
    std::vector<std::string> row{std::to_string(r.run), std::to_string(report.sizes[i]), r.estimator,
                                 r.ok ? "ok" : "error", r.ok ? format_double(r.global_mse) : ""};
    for (int j = 0; j < n; ++j) row.push_back(r.ok ? format_double(r.nmse(j)) : "");
    row.push_back(sanitize(r.error));
    runs.rows.push_back(std::move(row));
  }
  CsvTable curve;
  curve.header = {"estimator", "size", "count", "median_global_mse", "q1", "q3"};
  for (const auto& est : cfg.estimators) {
    for (int size : sizes) {
      std::vector<double> vals;
      for (std::size_t i = 0; i < report.runs.size(); ++i) {
        if (report.runs[i].estimator == est && report.sizes[i] == size && report.runs[i].ok) {
          vals.push_back(report.runs[i].global_mse);
        }
      }
      const auto s = summarize(vals);
      report.curve.push_back({est, size, s});
      curve.rows.push_back({est, std::to_string(size), std::to_string(s.count), format_double(s.median),
                            format_double(s.q1), format_double(s.q3)});
    }
  }
  ensure_dir(out_dir);
  write_csv(runs, out_dir / "data_efficiency_runs.csv");
  write_csv(curve, out_dir / "data_efficiency_curve.csv");
  {
    std::ofstream gp(out_dir / "data_efficiency.gp", std::ios::binary);
    gp << "# Global MSE against training size, one line per estimator.\n"
       << "set datafile separator ','\nset logscale y\nset xlabel 'training samples'\nset ylabel 'Global MSE'\n"
       << "plot for [e in '";
    for (std::size_t i = 0; i < cfg.estimators.size(); ++i) gp << (i ? " " : "") << cfg.estimators[i];
    gp << "'] 'data_efficiency_curve.csv' skip 1 using 2:(strcol(1) eq e ? $4 : NaN) with linespoints title e\n";
  }
  json rep;
  rep["wall_seconds"] = wall;
  rep["isa"] = simd::isa_name(simd::active_isa());
  rep["config"] = cfg.to_json();
  rep["runs"] = json::array();
  for (std::size_t i = 0; i < report.runs.size(); ++i) {
    auto j = fit_json(report.runs[i]);
    j["size"] = report.sizes[i];
    rep["runs"].push_back(j);
  }
  write_json(rep, out_dir / "data_efficiency_report.json");
  return report;
}

void write_csv(const CsvTable& t, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  auto line = [&](const std::vector<std::string>& fields) {
    for (std::size_t i = 0; i < fields.size(); ++i) out << (i ? "," : "") << fields[i];
    out << '\n';
  };
  line(t.header);
  for (const auto& r : t.rows) line(r);
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

CsvTable read_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  auto split = [](const std::string& s) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
      const auto pos = s.find(',', start);
      out.push_back(s.substr(start, pos == std::string::npos ? std::string::npos : pos - start));
      if (pos == std::string::npos) break;
      start = pos + 1;
    }
    return out;
  };
  CsvTable t;
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("empty CSV " + path.string());
  t.header = split(line);
  while (std::getline(in, line)) t.rows.push_back(split(line));
  return t;
}

}  // namespace lipgp::experiment
