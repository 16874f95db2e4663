#include "lipgp/gp/model.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numbers>

namespace lipgp::gp {

Vec stack_outputs(const Mat& y) {
  Vec out(y.size());
  for (long i = 0; i < y.rows(); ++i) {
    for (long j = 0; j < y.cols(); ++j) out(i * y.cols() + j) = y(i, j);
  }
  return out;
}

Mat unstack_outputs(const Vec& y, int d) {
  if (d < 1 || y.size() % d != 0) throw DimensionError("unstack: length not divisible by output count");
  Mat out(y.size() / d, d);
  for (long i = 0; i < out.rows(); ++i) {
    for (long j = 0; j < d; ++j) out(i, j) = y(i * d + j);
  }
  return out;
}

Mat noisy_gram(const Mat& k, const Vec& log_noise) {
  const long d = log_noise.size();
  if (d == 0 || k.rows() % d != 0) throw DimensionError("noise: Gram size not divisible by output count");
  Mat a = k;
  for (long i = 0; i < a.rows(); ++i) a(i, i) += std::exp(2.0 * log_noise(i % d));
  return a;
}

namespace {

double lml_from_factor(const CholeskyFactor& f, const Vec& y, Vec* alpha) {
  const Vec a = f.solve(y);
  const double v = -0.5 * y.dot(a) - 0.5 * f.log_det() -
                   0.5 * static_cast<double>(y.size()) * std::log(2.0 * std::numbers::pi);
  if (alpha) *alpha = a;
  return v;
}

void check_data(const CovarianceFunction& kernel, const Vec& log_noise, const std::vector<GpSample>& x, const Mat& y) {
  require_dim(y.rows(), static_cast<long>(x.size()), "training outputs");
  require_dim(y.cols(), kernel.outputs(), "output dimension");
  require_dim(log_noise.size(), kernel.outputs(), "noise parameters");
  if (!y.allFinite()) throw std::invalid_argument("training outputs contain non-finite values");
}

}  // namespace

TrainedModel::TrainedModel(std::shared_ptr<const CovarianceFunction> kernel, Vec log_noise, std::vector<GpSample> x,
                           const Mat& y, const JitterPolicy& jitter)
    : kernel_(std::move(kernel)), log_noise_(std::move(log_noise)), x_(std::move(x)) {
  check_data(*kernel_, log_noise_, x_, y);
  y_ = stack_outputs(y);
  if (x_.empty()) {
    alpha_ = Vec(0);
    return;
  }
  factor_ = CholeskyFactor::compute(noisy_gram(kernel_->gram(-1, x_), log_noise_), jitter);
  jitter_ = factor_.jitter();
  lml_ = lml_from_factor(factor_, y_, &alpha_);
  if (!alpha_.allFinite()) throw NotPositiveDefinite("posterior weights are not finite", std::nan(""));
}

TrainedModel::TrainedModel(std::shared_ptr<const CovarianceFunction> kernel, Vec log_noise, std::vector<GpSample> x,
                           Vec alpha, double jitter)
    : kernel_(std::move(kernel)), log_noise_(std::move(log_noise)), x_(std::move(x)), alpha_(std::move(alpha)),
      jitter_(jitter), lml_(std::nan("")) {
  require_dim(alpha_.size(), static_cast<long>(x_.size()) * kernel_->outputs(), "weight vector");
}

TrainedModel::Posterior TrainedModel::posterior(const GpSample& x) const {
  const Mat prior = kernel_->cross(-1, {x}, {x});
  Posterior p;
  if (x_.empty()) {
    p.mean = Vec::Zero(outputs());
    p.cov = prior;
    return p;
  }
  const Mat kx = kernel_->cross(-1, {x}, x_);
  p.mean = kx * alpha_;
  if (!has_factor()) throw UnsupportedOperation("posterior covariance requires the Gram factorisation");
  const Mat v = factor_.solve_lower(kx.transpose());
  p.cov = prior - v.transpose() * v;
  p.cov = 0.5 * (p.cov + p.cov.transpose()).eval();
  return p;
}

TrainedModel::Prediction TrainedModel::predict(const std::vector<GpSample>& xs, bool with_variance) const {
  const int d = outputs();
  Prediction out;
  const auto m = static_cast<long>(xs.size());
  if (x_.empty()) {
    out.mean = Mat::Zero(m, d);
  } else {
    const Mat kx = kernel_->cross(-1, xs, x_);
    out.mean = unstack_outputs(kx * alpha_, d);
    if (with_variance) {
      if (!has_factor()) throw UnsupportedOperation("posterior variance requires the Gram factorisation");
      const Mat v = factor_.solve_lower(kx.transpose());
      out.variance.resize(m, d);
      for (long i = 0; i < m; ++i) {
        const Mat prior = kernel_->cross(-1, {xs[static_cast<std::size_t>(i)]}, {xs[static_cast<std::size_t>(i)]});
        for (int j = 0; j < d; ++j) out.variance(i, j) = prior(j, j) - v.col(i * d + j).squaredNorm();
      }
    }
    return out;
  }
  if (with_variance) {
    out.variance.resize(m, d);
    for (long i = 0; i < m; ++i) {
      const Mat prior = kernel_->cross(-1, {xs[static_cast<std::size_t>(i)]}, {xs[static_cast<std::size_t>(i)]});
      out.variance.row(i) = prior.diagonal().transpose();
    }
  }
  return out;
}

void TrainedModel::functional_posterior(const Mat& cross, const Vec& prior, Vec& mean, Vec& variance) const {
  require_dim(cross.cols(), alpha_.size(), "cross-covariance width");
  require_dim(prior.size(), cross.rows(), "prior variances");
  mean = cross * alpha_;
  if (x_.empty()) {
    variance = prior;
    return;
  }
  if (!has_factor()) throw UnsupportedOperation("posterior variance requires the Gram factorisation");
  const Mat v = factor_.solve_lower(cross.transpose());
  variance = prior - v.colwise().squaredNorm().transpose();
}

double log_marginal_likelihood(const Mat& k_noisy, const Vec& y, const JitterPolicy& jitter) {
  require_dim(y.size(), k_noisy.rows(), "LML outputs");
  return lml_from_factor(CholeskyFactor::compute(k_noisy, jitter), y, nullptr);
}

double log_marginal_likelihood(const CovarianceFunction& kernel, const Vec& log_noise, const std::vector<GpSample>& x,
                               const Mat& y) {
  check_data(kernel, log_noise, x, y);
  return log_marginal_likelihood(noisy_gram(kernel.gram(-1, x), log_noise), stack_outputs(y));
}

// ---------------------------------------------------------------------------

LmlObjective::LmlObjective(const CovarianceFunction& kernel, std::vector<GpSample> x, const Mat& y,
                           JitterPolicy jitter)
    : kernel_(kernel.with_log_params(kernel.log_params())),
      x_(std::move(x)),
      jitter_(jitter),
      kernel_params_(kernel.num_params()),
      outputs_(kernel.outputs()) {
  check_data(kernel, Vec::Zero(outputs_), x_, y);
  y_ = stack_outputs(y);
  jitter_.report_eigenvalue = false;
}

double LmlObjective::lml_of(const Mat& k, const Vec& log_noise) const {
  try {
    return lml_from_factor(CholeskyFactor::compute(noisy_gram(k, log_noise), jitter_), y_, nullptr);
  } catch (const NotPositiveDefinite&) {
    return -std::numeric_limits<double>::infinity();
  }
}

void LmlObjective::ensure_base(const Vec& theta) {
  require_dim(theta.size(), kernel_params_ + outputs_, "LML parameters");
  if (has_base_ && theta == base_theta_) return;
  auto k = kernel_->with_log_params(theta.head(kernel_params_));
  const int nc = k->num_components();
  std::vector<bool> stale(static_cast<std::size_t>(nc), !has_base_);
  if (has_base_) {
    for (int p = 0; p < kernel_params_; ++p) {
      if (theta(p) != base_theta_(p)) stale[static_cast<std::size_t>(k->component_of_param(p))] = true;
    }
  } else {
    base_components_.assign(static_cast<std::size_t>(nc), Mat());
  }
  bool changed = false;
  for (int c = 0; c < nc; ++c) {
    if (!stale[static_cast<std::size_t>(c)]) continue;
    base_components_[static_cast<std::size_t>(c)] = k->gram(nc == 1 ? -1 : c, x_);
    ++gram_evals_;
    changed = true;
  }
  if (changed || !has_base_) {
    base_sum_ = base_components_.front();
    for (int c = 1; c < nc; ++c) base_sum_ += base_components_[static_cast<std::size_t>(c)];
  }
  base_theta_ = theta;
  has_base_ = true;
  base_value_ = lml_of(base_sum_, theta.tail(outputs_));
}

double LmlObjective::value(const Vec& theta, bool commit) {
  if (commit || !has_base_) {
    ensure_base(theta);
    return base_value_;
  }
  require_dim(theta.size(), kernel_params_ + outputs_, "LML parameters");
  // probe: reuse every cached component the probe leaves untouched
  auto k = kernel_->with_log_params(theta.head(kernel_params_));
  const int nc = k->num_components();
  std::vector<int> changed;
  for (int p = 0; p < kernel_params_; ++p) {
    if (theta(p) != base_theta_(p)) {
      const int c = k->component_of_param(p);
      if (std::find(changed.begin(), changed.end(), c) == changed.end()) changed.push_back(c);
    }
  }
  if (changed.empty()) return lml_of(base_sum_, theta.tail(outputs_));
  Mat sum = base_sum_;
  for (int c : changed) {
    sum -= base_components_[static_cast<std::size_t>(c)];
    sum += k->gram(nc == 1 ? -1 : c, x_);
    ++gram_evals_;
  }
  return lml_of(sum, theta.tail(outputs_));
}

Vec LmlObjective::gradient(const Vec& theta, double h, const Vec& lower, const Vec& upper) {
  ensure_base(theta);
  return fd_gradient([&](const Vec& t, int) { return value(t, false); }, theta, h, lower, upper);
}

Objective LmlObjective::as_objective() {
  Objective o;
  o.value = [this](const Vec& t, bool commit) { return value(t, commit); };
  o.gradient = [this](const Vec& t, double h, const Vec& lo, const Vec& hi) { return gradient(t, h, lo, hi); };
  return o;
}

// ---------------------------------------------------------------------------

TrainResult train(const CovarianceFunction& kernel, const std::vector<GpSample>& x, const Mat& y,
                  const TrainOptions& options) {
  const auto start = std::chrono::steady_clock::now();
  const int d = kernel.outputs();
  Vec log_noise = options.initial_log_noise;
  if (log_noise.size() == 0) {
    log_noise.resize(d);
    for (int j = 0; j < d; ++j) {
      const double rms = y.rows() > 0 ? std::sqrt(y.col(j).squaredNorm() / static_cast<double>(y.rows())) : 1.0;
      log_noise(j) = std::log(std::max(1e-2 * rms, options.noise_floor));
    }
  }
  check_data(kernel, log_noise, x, y);
  const double lo_noise = std::log(options.noise_floor), hi_noise = std::log(options.noise_ceiling);
  log_noise = log_noise.cwiseMax(lo_noise).cwiseMin(hi_noise);

  TrainResult result;
  std::unique_ptr<CovarianceFunction> fitted = kernel.with_log_params(kernel.log_params());
  if (options.optimize && !x.empty()) {
    const int kp = kernel.num_params();
    Vec klo, khi;
    kernel.bounds(klo, khi);
    Vec lower(kp + d), upper(kp + d), theta0(kp + d);
    lower << klo, Vec::Constant(d, lo_noise);
    upper << khi, Vec::Constant(d, hi_noise);
    if (options.pin_noise) {
      lower.tail(d) = log_noise;
      upper.tail(d) = log_noise;
    }
    theta0 << kernel.log_params().cwiseMax(klo).cwiseMin(khi), log_noise;
    LmlObjective objective(kernel, x, y, options.jitter);
    result.optimization = maximize(objective.as_objective(), theta0, lower, upper, options.optimizer);
    fitted = kernel.with_log_params(result.optimization.theta.head(kp));
    log_noise = result.optimization.theta.tail(d);
  } else {
    result.optimization.theta.resize(kernel.num_params() + d);
    result.optimization.theta << kernel.log_params(), log_noise;
    result.optimization.converged = true;
    result.optimization.message = "not optimised";
  }
  result.model = std::make_shared<const TrainedModel>(std::shared_ptr<const CovarianceFunction>(std::move(fitted)),
                                                      log_noise, x, y, options.jitter);
  result.optimization.value = result.model->log_marginal_likelihood();
  result.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return result;
}

}  // namespace lipgp::gp
