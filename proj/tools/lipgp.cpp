#include "lipgp/data/dataset.hpp"
#include "lipgp/energy/estimator.hpp"
#include "lipgp/experiment/checkpoint.hpp"
#include "lipgp/experiment/config.hpp"
#include "lipgp/experiment/runner.hpp"
#include "lipgp/gp/factor.hpp"
#include "lipgp/parallel.hpp"
#include "lipgp/robot/config_io.hpp"
#include "lipgp/simd/kernels.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

using namespace lipgp;
using namespace lipgp::experiment;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct Common {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out_dir;
  std::string estimator;
  int threads = 0;
  std::string isa;
};

struct Context {
  ExperimentConfig cfg;
  fs::path out;
};

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

Context prepare(const Common& c) {
  Context ctx;
  ctx.cfg = load_config(c.config);
  if (c.seed) ctx.cfg.seed = *c.seed;
  if (!c.estimator.empty()) ctx.cfg.estimators = split_list(c.estimator);
  ctx.out = c.out_dir.empty() ? ctx.cfg.output_dir : fs::path(c.out_dir);
  if (c.threads > 0) set_num_threads(c.threads);
  if (!c.isa.empty()) {
    const auto isa = c.isa == "scalar" ? simd::Isa::Scalar : simd::Isa::Avx2;
    if (c.isa != "scalar" && c.isa != "avx2") throw ConfigError("--isa must be scalar or avx2");
    if (!simd::isa_available(isa)) throw ConfigError("--isa " + c.isa + " not available on this CPU");
    simd::force_isa(isa);
  }
  fs::create_directories(ctx.out);
  return ctx;
}

void write_json(const json& j, const fs::path& p) {
  std::ofstream out(p, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + p.string());
  out << j.dump(2) << '\n';
}

void write_dataset(const data::Dataset& d, const ExperimentConfig& cfg, const data::SinusoidSpec& spec,
                   std::uint64_t seed, const fs::path& path) {
  data::write_dataset_csv(d, path);
  data::DatasetMetadata meta;
  meta.seed = seed;
  meta.sigma_e = d.sigma_e;
  meta.include_friction = cfg.include_friction;
  meta.trajectory = spec;
  meta.robot = cfg.robot_name;
  data::write_metadata(meta, path);
}

/// Training data: the configured dataset, or a simulated one written to out/train.csv.
std::pair<data::Dataset, fs::path> training_data(const Context& ctx) {
  if (!ctx.cfg.dataset.empty()) return {data::read_dataset_csv(ctx.cfg.dataset), ctx.cfg.dataset};
  ctx.cfg.validate();
  auto d = make_run_data(ctx.cfg, ctx.cfg.robot(), 0);
  auto spec = ctx.cfg.train_trajectory;
  spec.seed = run_seed(ctx.cfg.seed, 0, 0);
  const auto path = ctx.out / "train.csv";
  write_dataset(d.train, ctx.cfg, spec, run_seed(ctx.cfg.seed, 0, 2), path);
  return {std::move(d.train), path};
}

data::Dataset test_data(const Context& ctx) {
  if (!ctx.cfg.test_dataset.empty()) return data::read_dataset_csv(ctx.cfg.test_dataset);
  ctx.cfg.validate();
  return make_run_data(ctx.cfg, ctx.cfg.robot(), 0).test;
}

int cmd_simulate(const Context& ctx) {
  ctx.cfg.validate();
  const auto d = make_run_data(ctx.cfg, ctx.cfg.robot(), 0);
  auto train_spec = ctx.cfg.train_trajectory, test_spec = ctx.cfg.test_trajectory;
  train_spec.seed = run_seed(ctx.cfg.seed, 0, 0);
  test_spec.seed = run_seed(ctx.cfg.seed, 0, 1);
  write_dataset(d.train, ctx.cfg, train_spec, run_seed(ctx.cfg.seed, 0, 2), ctx.out / "train.csv");
  write_dataset(d.test, ctx.cfg, test_spec, run_seed(ctx.cfg.seed, 0, 3), ctx.out / "test.csv");
  std::cout << "wrote " << d.train.size() << " training and " << d.test.size() << " test samples to "
            << ctx.out.string() << '\n';
  return 0;
}

int cmd_train(const Context& ctx) {
  const auto [train, train_path] = training_data(ctx);
  const auto robot = ctx.cfg.robot();
  if (train.dof() != robot.dof()) throw ConfigError("dataset has " + std::to_string(train.dof()) + " joints, robot has " + std::to_string(robot.dof()));
  json rep = json::array();
  for (const auto& name : ctx.cfg.estimators) {
    if (!is_registered_estimator(name)) throw ConfigError("unknown estimator '" + name + "'");
    auto est = make_estimator(name, robot);
    const auto fit = est->fit(train, fit_settings(ctx.cfg, name));
    const auto path = ctx.out / (name + ".ckpt.json");
    save_checkpoint(*est, robot, fs::absolute(train_path), path);
    rep.push_back({{"estimator", name},
                   {"checkpoint", path.filename().string()},
                   {"seconds", fit.seconds},
                   {"iterations", fit.iterations},
                   {"optimizer_warnings", fit.warnings},
                   {"messages", fit.messages}});
    std::cout << name << ": " << fit.iterations << " iterations, " << fit.seconds << " s -> " << path.string()
              << '\n';
  }
  write_json(rep, ctx.out / "train_report.json");
  return 0;
}

std::pair<LoadedCheckpoint, Context> with_checkpoint(Context ctx) {
  if (ctx.cfg.checkpoint.empty()) throw ConfigError("config: 'checkpoint' is required for this command");
  auto ck = load_checkpoint(ctx.cfg.checkpoint);
  if (ctx.cfg.robot_json.is_null()) {
    ctx.cfg.robot_json = robot::robot_to_json(ck.robot);
    const int n = ck.robot.dof();
    ctx.cfg.limits = data::JointLimits::uniform(n, 2.5, 3.0, 8.0);
    ctx.cfg.noise_sigma = Vec::Zero(n);
  }
  return {std::move(ck), std::move(ctx)};
}

int cmd_eval(const Context& base) {
  auto [ck, ctx] = with_checkpoint(base);
  const auto test = test_data(ctx);
  Mat var;
  const Mat pred = ck.estimator->predict(test.inputs, &var);
  const int n = test.dof();
  CsvTable p;
  p.header = {"t"};
  for (int j = 1; j <= n; ++j) p.header.push_back("tau" + std::to_string(j) + "_pred");
  for (int j = 1; j <= n; ++j) p.header.push_back("tau" + std::to_string(j) + "_var");
  for (int j = 1; j <= n; ++j) p.header.push_back("tau" + std::to_string(j));
  for (int i = 0; i < test.size(); ++i) {
    std::vector<std::string> row{data::format_double(test.time[static_cast<std::size_t>(i)])};
    for (int j = 0; j < n; ++j) row.push_back(data::format_double(pred(i, j)));
    for (int j = 0; j < n; ++j) row.push_back(var.size() ? data::format_double(var(i, j)) : "");
    for (int j = 0; j < n; ++j) row.push_back(data::format_double(test.torques(i, j)));
    p.rows.push_back(std::move(row));
  }
  write_csv(p, ctx.out / "eval_predictions.csv");
  const Vec nm = nmse_percent(pred, test.torques);
  CsvTable m{{"estimator", "joint", "nmse"}, {}};
  for (int j = 0; j < n; ++j) {
    m.rows.push_back({ck.estimator->name(), std::to_string(j + 1), data::format_double(nm(j))});
  }
  m.rows.push_back({ck.estimator->name(), "avg", data::format_double(nm.mean())});
  m.rows.push_back({ck.estimator->name(), "global_mse", data::format_double(global_mse(pred, test.torques))});
  write_csv(m, ctx.out / "eval_metrics.csv");
  for (int j = 0; j < n; ++j) std::cout << "joint " << j + 1 << " nMSE " << nm(j) << " %\n";
  return 0;
}

int cmd_energy(const Context& base) {
  Context ctx = base;
  std::unique_ptr<Estimator> owned;
  const Estimator* est = nullptr;
  std::optional<LoadedCheckpoint> ck;
  if (!ctx.cfg.checkpoint.empty()) {
    auto pr = with_checkpoint(ctx);
    ck = std::move(pr.first);
    ctx = std::move(pr.second);
    est = ck->estimator.get();
  } else {
    const auto [train, path] = training_data(ctx);
    const auto robot = ctx.cfg.robot();
    const auto& name = ctx.cfg.estimators.front();
    if (!is_registered_estimator(name)) throw ConfigError("unknown estimator '" + name + "'");
    owned = make_estimator(name, robot);
    owned->fit(train, fit_settings(ctx.cfg, name));
    est = owned.get();
  }
  const auto robot = ck ? ck->robot : ctx.cfg.robot();
  const auto* model = est->lagrangian_model();
  if (!model) throw std::invalid_argument("estimator '" + est->name() + "' has no kinetic/potential split");
  const auto test = test_data(ctx);
  auto post = energy::estimate_energies(*model, test.inputs, test.time);
  const auto oracle = energy::oracle_energies(robot, test.inputs);
  energy::align_offset(post, 0, oracle.potential(0));
  energy::write_energy_csv(post, oracle, ctx.out / "energy.csv");
  const auto s = score_energies(*model, robot, test);
  CsvTable m{{"metric", "value"},
             {{"T_nmse", data::format_double(s.kinetic)},
              {"V_nmse", data::format_double(s.potential)},
              {"V_nmse_raw", data::format_double(s.potential_raw)},
              {"E_nmse", data::format_double(s.total)},
              {"clamped_variances", std::to_string(s.clamped)}}};
  write_csv(m, ctx.out / "energy_metrics.csv");
  std::cout << "kinetic nMSE " << s.kinetic << " %, potential nMSE " << s.potential << " %\n";
  return 0;
}

void print_summary(const McReport& rep, int n) {
  for (const auto& [name, sums] : rep.summaries) {
    std::cout << name << ":";
    for (int j = 0; j < static_cast<int>(sums.size()); ++j) {
      std::cout << (j < n ? " joint " + std::to_string(j + 1) : std::string(" avg")) << " median nMSE "
                << sums[static_cast<std::size_t>(j)].median << " %;";
    }
    std::cout << '\n';
  }
}

int cmd_mc(const Context& ctx) {
  const auto rep = run_mc_generalization(ctx.cfg, ctx.out);
  print_summary(rep, ctx.cfg.dof());
  return 0;
}

int cmd_id(const Context& ctx) {
  const auto rep = run_id_baseline(ctx.cfg, ctx.out);
  print_summary(rep, ctx.cfg.dof());
  return 0;
}

int cmd_data_efficiency(const Context& ctx) {
  const auto rep = run_data_efficiency(ctx.cfg, ctx.out);
  for (const auto& p : rep.curve) {
    std::cout << p.estimator << " N=" << p.size << " median global MSE " << p.global_mse.median << '\n';
  }
  return 0;
}

int report_error(const std::string& command, const std::string& kind, const std::string& message,
                 const fs::path& out, int code) {
  const json rec{{"status", "error"}, {"command", command}, {"error", kind}, {"message", message}, {"exit_code", code}};
  std::cerr << rec.dump() << '\n';
  if (!out.empty()) {
    std::error_code ec;
    fs::create_directories(out, ec);
    std::ofstream f(out / "error.json", std::ios::binary);
    if (f) f << rec.dump(2) << '\n';
  }
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Lagrangian-inspired multi-output GP for robot inverse dynamics"};
  app.require_subcommand(1);
  Common common;
  struct Sub {
    const char* name;
    const char* help;
    int (*run)(const Context&);
  };
  const Sub subs[] = {
      {"simulate", "generate training and test datasets from the rigid-body oracle", cmd_simulate},
      {"train", "fit estimators and write checkpoints", cmd_train},
      {"eval", "evaluate a checkpoint on a test set", cmd_eval},
      {"energy", "estimate kinetic and potential energy along a test trajectory", cmd_energy},
      {"mc", "Monte Carlo generalisation study", cmd_mc},
      {"data-efficiency", "error against training-set size", cmd_data_efficiency},
      {"id-baseline", "Monte Carlo study including parametric identification", cmd_id},
  };
  std::uint64_t seed = 0;
  for (const auto& s : subs) {
    auto* sc = app.add_subcommand(s.name, s.help);
    sc->add_option("config", common.config, "JSON configuration file")->required();
    sc->add_option("--seed", seed, "master seed (overrides the config)");
    sc->add_option("--out-dir", common.out_dir, "output directory (overrides the config)");
    sc->add_option("--estimator", common.estimator, "estimator or comma-separated list (overrides the config)");
    sc->add_option("--threads", common.threads, "worker threads");
    sc->add_option("--isa", common.isa, "force kernel instruction set: scalar or avx2");
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return report_error("", "usage", e.what(), {}, 2);
  }
  std::string command;
  int (*run)(const Context&) = nullptr;
  for (const auto& s : subs) {
    auto* sc = app.get_subcommand(s.name);
    if (sc->parsed()) {
      command = s.name;
      run = s.run;
      if (sc->count("--seed")) common.seed = seed;
    }
  }
  fs::path out = common.out_dir;
  try {
    const auto ctx = prepare(common);
    out = ctx.out;
    return run(ctx);
  } catch (const ConfigError& e) {
    return report_error(command, "config", e.what(), out, 2);
  } catch (const gp::NotPositiveDefinite& e) {
    return report_error(command, "not_positive_definite", e.what(), out, 1);
  } catch (const std::exception& e) {
    return report_error(command, "runtime", e.what(), out, 1);
  }
}
