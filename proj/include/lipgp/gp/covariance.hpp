#pragma once

#include "lipgp/lip/operator_kernel.hpp"
#include "lipgp/robot/model.hpp"

#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace lipgp::gp {

/// One GP input: a joint state plus, for semiparametric kernels, its regressor
/// matrix (n x n_d; empty otherwise).
struct GpSample {
  robot::JointState state;
  Mat regressor;
};

/// Multi-output covariance k(x, x') returning d x d blocks. Gram matrices are
/// sample-major: row index = sample * d + output.
///
/// A covariance may be a sum of components; parameters belong to exactly one
/// component, so a change in one parameter only requires that component's
/// Gram matrix to be recomputed.
class CovarianceFunction {
 public:
  virtual ~CovarianceFunction() = default;

  virtual std::string name() const = 0;
  virtual int outputs() const = 0;
  virtual Vec log_params() const = 0;
  virtual std::vector<std::string> param_names() const = 0;
  virtual std::unique_ptr<CovarianceFunction> with_log_params(const Vec& theta) const = 0;
  virtual void bounds(Vec& lower, Vec& upper) const;

  virtual int num_components() const { return 1; }
  virtual int component_of_param(int /*p*/) const { return 0; }

  /// Cross-covariance K(a, b) of component c (all components when c < 0).
  virtual Mat cross(int c, const std::vector<GpSample>& a, const std::vector<GpSample>& b) const = 0;
  /// Symmetric Gram K(a, a) of component c.
  virtual Mat gram(int c, const std::vector<GpSample>& a) const;

  int num_params() const { return static_cast<int>(log_params().size()); }
  Mat block(const GpSample& x, const GpSample& xp) const;
};

struct FrictionOptions {
  bool linear = true;      // phi Gamma phi'^T with phi = [qd_i, sign qd_i]
  bool squared_exp = false; // extra SE term on (q, qd, qdd) per joint
};

/// Torque covariance from a Lagrangian kernel (LIP or LSE), optionally plus a
/// per-joint friction kernel on the diagonal blocks.
class LagrangianCovariance : public CovarianceFunction {
 public:
  LagrangianCovariance(std::string name, lip::OperatorKernel op, std::optional<FrictionOptions> friction = {});

  std::string name() const override { return name_; }
  int outputs() const override { return op_.dof(); }
  Vec log_params() const override;
  std::vector<std::string> param_names() const override;
  std::unique_ptr<CovarianceFunction> with_log_params(const Vec& theta) const override;
  void bounds(Vec& lower, Vec& upper) const override;
  int num_components() const override;
  int component_of_param(int p) const override;
  Mat cross(int c, const std::vector<GpSample>& a, const std::vector<GpSample>& b) const override;
  Mat gram(int c, const std::vector<GpSample>& a) const override;

  const lip::OperatorKernel& op() const { return op_; }
  bool has_friction() const { return friction_.has_value(); }

  /// Cov[E(x_q), tau(X)] rows (|queries| x N n) and prior variances k^E(x_q, x_q).
  Mat energy_cross(lip::EnergyPart part, const std::vector<GpSample>& queries,
                   const std::vector<GpSample>& train) const;
  Vec energy_prior(lip::EnergyPart part, const std::vector<GpSample>& queries) const;

 private:
  int friction_params_per_joint() const;
  void fill(int c, const std::vector<GpSample>& a, const std::vector<GpSample>& b, bool symmetric, Mat& out) const;
  double friction_value(int joint, const GpSample& x, const GpSample& xp) const;

  std::string name_;
  lip::OperatorKernel op_;
  std::optional<FrictionOptions> friction_;
  Vec friction_theta_;  // per joint: [log gamma_v, log gamma_c, (log lambda, log Sigma x 3n)]
};

/// Single-output kernel for one joint: SE on (q, qd, qdd), optionally plus the
/// linear friction features of that joint or a regressor-row linear kernel.
class ScalarCovariance : public CovarianceFunction {
 public:
  enum class Extra { None, Friction, Regressor };

  ScalarCovariance(std::string name, int dof, int joint, Extra extra, int regressor_cols = 0);

  std::string name() const override { return name_; }
  int outputs() const override { return 1; }
  Vec log_params() const override { return theta_; }
  std::vector<std::string> param_names() const override;
  std::unique_ptr<CovarianceFunction> with_log_params(const Vec& theta) const override;
  void bounds(Vec& lower, Vec& upper) const override;
  Mat cross(int c, const std::vector<GpSample>& a, const std::vector<GpSample>& b) const override;
  Mat gram(int c, const std::vector<GpSample>& a) const override;

  int joint() const { return joint_; }
  /// Data-driven initial values: lambda = var(y), Sigma_k = var(x_k) (floored).
  void initialize_from_data(const std::vector<GpSample>& xs, const Vec& y);

 private:
  int num_se() const { return 1 + 3 * dof_; }
  void fill(const std::vector<GpSample>& a, const std::vector<GpSample>& b, bool symmetric, Mat& out) const;

  std::string name_;
  int dof_, joint_;
  Extra extra_;
  int regressor_cols_;
  Vec theta_;  // [log lambda, log Sigma (3n), extra...]
};

/// Single-output kernel for joint i equal to G_i G'_i k^L of a LIP kernel
/// (stand-in for a per-joint physics-informed baseline).
class DiagonalOperatorCovariance : public CovarianceFunction {
 public:
  DiagonalOperatorCovariance(std::string name, lip::OperatorKernel op, int joint);

  std::string name() const override { return name_; }
  int outputs() const override { return 1; }
  Vec log_params() const override { return op_.log_params(); }
  std::vector<std::string> param_names() const override { return op_.param_names(); }
  std::unique_ptr<CovarianceFunction> with_log_params(const Vec& theta) const override;
  int num_components() const override { return op_.num_components(); }
  int component_of_param(int p) const override { return op_.component_of_param(p); }
  Mat cross(int c, const std::vector<GpSample>& a, const std::vector<GpSample>& b) const override;

 private:
  std::string name_;
  lip::OperatorKernel op_;
  int joint_;
};

}  // namespace lipgp::gp
