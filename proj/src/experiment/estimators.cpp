#include "lipgp/experiment/estimators.hpp"

#include "lipgp/lip/lip_kernel.hpp"
#include "lipgp/robot/dynamics.hpp"

#include <Eigen/QR>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <stdexcept>

namespace lipgp::experiment {

using nlohmann::json;

namespace {

std::vector<double> to_std(const Vec& v) { return {v.data(), v.data() + v.size()}; }

Vec to_vec(const json& j) {
  const auto v = j.get<std::vector<double>>();
  return Eigen::Map<const Vec>(v.data(), static_cast<long>(v.size()));
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// Evenly spread rows used for hyperparameter optimisation on large sets.
std::vector<int> optimisation_rows(int n, int cap) {
  std::vector<int> rows;
  if (cap <= 0 || n <= cap) {
    rows.resize(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) rows[static_cast<std::size_t>(i)] = i;
    return rows;
  }
  for (int i = 0; i < cap; ++i) {
    rows.push_back(static_cast<int>((static_cast<long long>(i) * n) / cap));
  }
  return rows;
}

// ---------------------------------------------------------------------------

class GpEstimator : public Estimator {
 public:
  GpEstimator(std::string name, const robot::RobotModel& robot) : name_(std::move(name)), robot_(robot) {
    const auto kinds = robot.joint_kinds();
    const int n = robot.dof();
    using gp::ScalarCovariance;
    auto lip_op = [&] { return lip::OperatorKernel(kinds, lip::lip_components(kinds)); };
    auto lse_op = [&] { return lip::OperatorKernel(kinds, lip::lse_components(kinds, 0.0, 0.0)); };
    if (name_ == "lip") {
      prototypes_.push_back(std::make_unique<gp::LagrangianCovariance>(name_, lip_op()));
    } else if (name_ == "lse") {
      prototypes_.push_back(std::make_unique<gp::LagrangianCovariance>(name_, lse_op()));
    } else if (name_ == "lip+friction") {
      prototypes_.push_back(std::make_unique<gp::LagrangianCovariance>(name_, lip_op(), gp::FrictionOptions{true, true}));
    } else if (name_ == "lse+friction") {
      prototypes_.push_back(std::make_unique<gp::LagrangianCovariance>(name_, lse_op(), gp::FrictionOptions{true, false}));
    } else {
      for (int j = 0; j < n; ++j) {
        if (name_ == "se") {
          prototypes_.push_back(std::make_unique<ScalarCovariance>(name_, n, j, ScalarCovariance::Extra::None));
        } else if (name_ == "se+friction") {
          prototypes_.push_back(std::make_unique<ScalarCovariance>(name_, n, j, ScalarCovariance::Extra::Friction));
        } else if (name_ == "sp") {
          prototypes_.push_back(
              std::make_unique<ScalarCovariance>(name_, n, j, ScalarCovariance::Extra::Regressor, 12 * n));
          needs_regressor_ = true;
        } else if (name_ == "gip-standin") {
          prototypes_.push_back(std::make_unique<gp::DiagonalOperatorCovariance>(name_, lip_op(), j));
        } else {
          throw std::invalid_argument("unknown estimator '" + name_ + "'");
        }
      }
    }
  }

  std::string name() const override { return name_; }

  FitReport fit(const data::Dataset& train, const FitSettings& s) override {
    train.validate();
    require_dim(train.dof(), robot_.dof(), "dataset joints");
    const auto t0 = std::chrono::steady_clock::now();
    const auto xs = to_samples(train.inputs, needs_regressor_ ? &robot_ : nullptr);
    const bool multi = prototypes_.size() == 1 && prototypes_.front()->outputs() == robot_.dof();
    const auto opt_rows = optimisation_rows(train.size(), s.max_optimization_samples);
    std::vector<gp::GpSample> opt_x;
    for (int r : opt_rows) opt_x.push_back(xs[static_cast<std::size_t>(r)]);

    FitReport report;
    models_.clear();
    for (std::size_t m = 0; m < prototypes_.size(); ++m) {
      const auto& proto = *prototypes_[m];
      const int d = proto.outputs();
      const Mat y = multi ? train.torques : Mat(train.torques.col(static_cast<long>(m)));
      Mat opt_y(static_cast<long>(opt_rows.size()), d);
      for (std::size_t i = 0; i < opt_rows.size(); ++i) opt_y.row(static_cast<long>(i)) = y.row(opt_rows[i]);

      std::unique_ptr<gp::CovarianceFunction> kernel = proto.with_log_params(proto.log_params());
      if (auto* sc = dynamic_cast<gp::ScalarCovariance*>(kernel.get())) sc->initialize_from_data(opt_x, opt_y.col(0));
      if (s.initial_log_params) kernel = kernel->with_log_params(*s.initial_log_params);

      gp::TrainOptions opts;
      opts.optimizer = s.optimizer;
      opts.noise_floor = s.noise_floor;
      opts.pin_noise = !s.learn_noise;
      if (!s.learn_noise) {
        opts.initial_log_noise = multi ? Vec(train.sigma_e) : Vec::Constant(1, train.sigma_e(static_cast<long>(m)));
        opts.initial_log_noise = opts.initial_log_noise.cwiseMax(s.noise_floor).array().log();
      }
      if (m < s.warm_start.size()) {
        const Vec& w = s.warm_start[m];
        require_dim(w.size(), kernel->num_params() + d, "warm-start parameters");
        kernel = kernel->with_log_params(w.head(kernel->num_params()));
        if (s.learn_noise) opts.initial_log_noise = w.tail(d);
      }
      const auto res = gp::train(*kernel, opt_x, opt_y, opts);
      report.iterations += res.optimization.iterations;
      if (res.optimization.warning) {
        ++report.warnings;
        report.messages.push_back(proto.name() + " model " + std::to_string(m) + ": " + res.optimization.message);
      }
      if (opt_rows.size() == xs.size()) {
        models_.push_back(res.model);
      } else {
        models_.push_back(std::make_shared<const gp::TrainedModel>(res.model->kernel_ptr(), res.model->log_noise(), xs,
                                                                   y));
      }
    }
    report.seconds = seconds_since(t0);
    return report;
  }

  Mat predict(const std::vector<robot::JointState>& states, Mat* variance) const override {
    if (models_.empty()) throw std::logic_error("estimator '" + name_ + "' used before fitting");
    const auto xs = to_samples(states, needs_regressor_ ? &robot_ : nullptr);
    const int n = robot_.dof();
    Mat mean(static_cast<long>(states.size()), n);
    if (variance) variance->resize(mean.rows(), n);
    if (models_.size() == 1 && models_.front()->outputs() == n) {
      auto p = models_.front()->predict(xs, variance != nullptr);
      if (variance) *variance = p.variance;
      return p.mean;
    }
    for (std::size_t m = 0; m < models_.size(); ++m) {
      auto p = models_[m]->predict(xs, variance != nullptr);
      mean.col(static_cast<long>(m)) = p.mean.col(0);
      if (variance) variance->col(static_cast<long>(m)) = p.variance.col(0);
    }
    return mean;
  }

  const gp::TrainedModel* lagrangian_model() const override {
    if (models_.size() != 1) return nullptr;
    const auto* cov = dynamic_cast<const gp::LagrangianCovariance*>(&models_.front()->kernel());
    return cov && cov->op().has_energy_split() ? models_.front().get() : nullptr;
  }

  std::vector<Vec> hyperparameters() const override {
    std::vector<Vec> out;
    for (const auto& m : models_) {
      const Vec k = m->kernel().log_params();
      Vec v(k.size() + m->log_noise().size());
      v << k, m->log_noise();
      out.push_back(v);
    }
    return out;
  }

  json to_checkpoint() const override {
    json j;
    j["estimator"] = name_;
    j["models"] = json::array();
    const bool multi = models_.size() == 1 && models_.front()->outputs() == robot_.dof();
    for (std::size_t m = 0; m < models_.size(); ++m) {
      const auto& tm = *models_[m];
      json mj;
      mj["kernel"] = tm.kernel().name();
      mj["joint"] = multi ? json(nullptr) : json(m);
      mj["outputs"] = tm.outputs();
      mj["param_names"] = tm.kernel().param_names();
      mj["log_params"] = to_std(tm.kernel().log_params());
      mj["log_noise"] = to_std(tm.log_noise());
      mj["alpha"] = to_std(tm.alpha());
      mj["jitter"] = tm.jitter();
      mj["log_marginal_likelihood"] = tm.log_marginal_likelihood();
      j["models"].push_back(mj);
    }
    return j;
  }

  void from_checkpoint(const json& j, const data::Dataset& train) override {
    if (j.at("estimator").get<std::string>() != name_) throw std::invalid_argument("checkpoint estimator mismatch");
    const auto& ms = j.at("models");
    if (ms.size() != prototypes_.size()) throw std::invalid_argument("checkpoint: wrong number of models");
    const auto xs = to_samples(train.inputs, needs_regressor_ ? &robot_ : nullptr);
    const bool multi = prototypes_.size() == 1 && prototypes_.front()->outputs() == robot_.dof();
    models_.clear();
    for (std::size_t m = 0; m < prototypes_.size(); ++m) {
      const auto& mj = ms[m];
      std::shared_ptr<const gp::CovarianceFunction> kernel =
          prototypes_[m]->with_log_params(to_vec(mj.at("log_params")));
      const Vec log_noise = to_vec(mj.at("log_noise"));
      const Mat y = multi ? train.torques : Mat(train.torques.col(static_cast<long>(m)));
      auto model = std::make_shared<const gp::TrainedModel>(kernel, log_noise, xs, y);
      const Vec stored = to_vec(mj.at("alpha"));
      require_dim(stored.size(), model->alpha().size(), "checkpoint weights");
      if ((stored - model->alpha()).norm() > 1e-6 * std::max(1.0, stored.norm())) {
        throw std::invalid_argument("checkpoint weights do not match the referenced training set");
      }
      models_.push_back(std::move(model));
    }
  }

 private:
  std::string name_;
  robot::RobotModel robot_;
  std::vector<std::unique_ptr<gp::CovarianceFunction>> prototypes_;
  std::vector<std::shared_ptr<const gp::TrainedModel>> models_;
  bool needs_regressor_ = false;
};

// ---------------------------------------------------------------------------

/// Ridge-regularised least squares on the rigid-body regressor.
class IdEstimator : public Estimator {
 public:
  explicit IdEstimator(const robot::RobotModel& robot) : robot_(robot) {}

  std::string name() const override { return "id"; }

  FitReport fit(const data::Dataset& train, const FitSettings& s) override {
    train.validate();
    const auto t0 = std::chrono::steady_clock::now();
    const int n = robot_.dof();
    const long nd = 12L * n;
    Mat phi(static_cast<long>(train.size()) * n, nd);
    Vec y(phi.rows());
    for (int i = 0; i < train.size(); ++i) {
      phi.middleRows(static_cast<long>(i) * n, n) = robot::regressor_matrix(robot_, train.inputs[static_cast<std::size_t>(i)]);
      y.segment(static_cast<long>(i) * n, n) = train.torques.row(i).transpose();
    }
    rho_ = s.id_ridge * phi.squaredNorm() / static_cast<double>(nd);  // tr(Phi^T Phi) / n_d
    if (rho_ > 0.0) {
      Mat a(phi.rows() + nd, nd);
      a << phi, std::sqrt(rho_) * Mat::Identity(nd, nd);
      Vec b = Vec::Zero(a.rows());
      b.head(y.size()) = y;
      weights_ = a.householderQr().solve(b);
    } else {
      weights_ = phi.colPivHouseholderQr().solve(y);
    }
    FitReport r;
    r.seconds = seconds_since(t0);
    return r;
  }

  Mat predict(const std::vector<robot::JointState>& xs, Mat* variance) const override {
    if (weights_.size() == 0) throw std::logic_error("estimator 'id' used before fitting");
    Mat out(static_cast<long>(xs.size()), robot_.dof());
    for (std::size_t i = 0; i < xs.size(); ++i) {
      out.row(static_cast<long>(i)) = (robot::regressor_matrix(robot_, xs[i]) * weights_).transpose();
    }
    if (variance) variance->resize(0, 0);
    return out;
  }

  json to_checkpoint() const override {
    return json{{"estimator", "id"}, {"weights", to_std(weights_)}, {"ridge", rho_}};
  }

  void from_checkpoint(const json& j, const data::Dataset&) override {
    weights_ = to_vec(j.at("weights"));
    require_dim(weights_.size(), 12L * robot_.dof(), "identified parameters");
    rho_ = j.value("ridge", 0.0);
  }

  const Vec& weights() const { return weights_; }

 private:
  robot::RobotModel robot_;
  Vec weights_;
  double rho_ = 0.0;
};

}  // namespace

const std::vector<std::string>& registered_estimators() {
  static const std::vector<std::string> names{"lip",          "se",           "lse",         "sp", "lip+friction",
                                              "se+friction", "lse+friction", "gip-standin", "id"};
  return names;
}

bool is_registered_estimator(const std::string& name) {
  const auto& r = registered_estimators();
  return std::find(r.begin(), r.end(), name) != r.end();
}

std::unique_ptr<Estimator> make_estimator(const std::string& name, const robot::RobotModel& robot) {
  if (!is_registered_estimator(name)) throw std::invalid_argument("unknown estimator '" + name + "'");
  if (name == "id") return std::make_unique<IdEstimator>(robot);
  return std::make_unique<GpEstimator>(name, robot);
}

std::vector<gp::GpSample> to_samples(const std::vector<robot::JointState>& xs, const robot::RobotModel* robot) {
  std::vector<gp::GpSample> out;
  out.reserve(xs.size());
  for (const auto& s : xs) out.push_back({s, robot ? robot::regressor_matrix(*robot, s) : Mat()});
  return out;
}

}  // namespace lipgp::experiment
