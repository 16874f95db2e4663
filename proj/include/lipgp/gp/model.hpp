#pragma once

#include "lipgp/gp/covariance.hpp"
#include "lipgp/gp/factor.hpp"
#include "lipgp/gp/optimizer.hpp"

#include <memory>
#include <vector>

namespace lipgp::gp {

/// Stacks an N x d output matrix sample-major (index = sample * d + output).
Vec stack_outputs(const Mat& y);
Mat unstack_outputs(const Vec& y, int d);

/// (K + diag(sigma^2)) with sigma given per output as log standard deviations.
Mat noisy_gram(const Mat& k, const Vec& log_noise);

/// Posterior of a GP with zero prior mean, conditioned on (X, Y).
class TrainedModel {
 public:
  struct Posterior {
    Vec mean;
    Mat cov;
  };
  struct Prediction {
    Mat mean;      // M x d
    Mat variance;  // M x d (empty when not requested)
  };

  TrainedModel(std::shared_ptr<const CovarianceFunction> kernel, Vec log_noise, std::vector<GpSample> x, const Mat& y,
               const JitterPolicy& jitter = {});
  /// Rebuilds a model from stored weights without refactorising (no variances).
  TrainedModel(std::shared_ptr<const CovarianceFunction> kernel, Vec log_noise, std::vector<GpSample> x, Vec alpha,
               double jitter);

  const CovarianceFunction& kernel() const { return *kernel_; }
  std::shared_ptr<const CovarianceFunction> kernel_ptr() const { return kernel_; }
  const Vec& log_noise() const { return log_noise_; }
  const std::vector<GpSample>& inputs() const { return x_; }
  const Vec& alpha() const { return alpha_; }
  double jitter() const { return jitter_; }
  bool has_factor() const { return factor_.size() > 0 || x_.empty(); }
  const CholeskyFactor& factor() const { return factor_; }
  int outputs() const { return kernel_->outputs(); }
  double log_marginal_likelihood() const { return lml_; }

  Posterior posterior(const GpSample& x) const;
  Prediction predict(const std::vector<GpSample>& xs, bool with_variance = true) const;
  /// Posterior mean and variance of a linear functional f with Cov[f(x_q), y] = cross
  /// (rows per query) and prior variance `prior`.
  void functional_posterior(const Mat& cross, const Vec& prior, Vec& mean, Vec& variance) const;

 private:
  std::shared_ptr<const CovarianceFunction> kernel_;
  Vec log_noise_;
  std::vector<GpSample> x_;
  Vec y_;
  CholeskyFactor factor_;
  Vec alpha_;
  double jitter_ = 0.0;
  double lml_ = 0.0;
};

/// -1/2 y^T A^{-1} y - 1/2 log det A - (Nd/2) log 2 pi with A = K + noise.
double log_marginal_likelihood(const Mat& k_noisy, const Vec& y, const JitterPolicy& jitter = {});
double log_marginal_likelihood(const CovarianceFunction& kernel, const Vec& log_noise,
                               const std::vector<GpSample>& x, const Mat& y);

/// LML as a function of theta = [kernel log params, log noise per output], with
/// per-component Gram caching so that perturbing a single parameter recomputes
/// one component only (and perturbing a noise parameter none).
class LmlObjective {
 public:
  LmlObjective(const CovarianceFunction& kernel, std::vector<GpSample> x, const Mat& y, JitterPolicy jitter = {});

  double value(const Vec& theta, bool commit);
  Vec gradient(const Vec& theta, double h, const Vec& lower, const Vec& upper);
  Objective as_objective();
  int kernel_params() const { return kernel_params_; }
  long gram_evaluations() const { return gram_evals_; }

 private:
  void ensure_base(const Vec& theta);
  double lml_of(const Mat& k, const Vec& log_noise) const;

  std::unique_ptr<CovarianceFunction> kernel_;
  std::vector<GpSample> x_;
  Vec y_;
  JitterPolicy jitter_;
  int kernel_params_;
  int outputs_;
  Vec base_theta_;
  std::vector<Mat> base_components_;
  Mat base_sum_;
  double base_value_ = 0.0;
  bool has_base_ = false;
  long gram_evals_ = 0;
};

struct TrainOptions {
  bool optimize = true;
  bool pin_noise = false;
  Vec initial_log_noise;     // empty: 1% of the per-output RMS, floored
  double noise_floor = 1e-6;  // lower bound on each noise standard deviation
  double noise_ceiling = 1e3;
  OptimizerOptions optimizer;
  JitterPolicy jitter;
};

struct TrainResult {
  std::shared_ptr<const TrainedModel> model;
  OptimizerResult optimization;
  double seconds = 0.0;
};

/// Fits hyperparameters by maximising the LML and conditions on (X, Y).
TrainResult train(const CovarianceFunction& kernel, const std::vector<GpSample>& x, const Mat& y,
                  const TrainOptions& options = {});

}  // namespace lipgp::gp
