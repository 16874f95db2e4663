#include "lipgp/gp/covariance.hpp"

#include "lipgp/lip/baselines.hpp"
#include "lipgp/parallel.hpp"
#include "lipgp/simd/kernels.hpp"

#include <cmath>
#include <stdexcept>

namespace lipgp::gp {

namespace {

constexpr double kLogLower = -15.0;
constexpr double kLogUpper = 15.0;
const double kLogOffsetFloor = std::log(1e-12);

std::vector<lip::OperatorKernel::Side> prepare_all(const lip::OperatorKernel& op, const std::vector<GpSample>& xs) {
  std::vector<lip::OperatorKernel::Side> out(xs.size());
  parallel_for(xs.size(), [&](std::size_t b, std::size_t e, int) {
    for (std::size_t i = b; i < e; ++i) out[i] = op.prepare(xs[i].state);
  });
  return out;
}

// Stacked (q, qd, qdd) inputs of xs, one coordinate per row.
Mat stacked_columns(const std::vector<GpSample>& xs, int dim) {
  Mat cols(dim, static_cast<long>(xs.size()));
  for (std::size_t j = 0; j < xs.size(); ++j) cols.col(static_cast<long>(j)) = lip::stacked_input(xs[j].state);
  return cols;
}

bool ends_with(const std::string& s, const std::string& suffix) {
  return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

}  // namespace

void CovarianceFunction::bounds(Vec& lower, Vec& upper) const {
  const auto p = num_params();
  lower = Vec::Constant(p, kLogLower);
  upper = Vec::Constant(p, kLogUpper);
  const auto names = param_names();
  for (int i = 0; i < p; ++i) {
    if (ends_with(names[static_cast<std::size_t>(i)], "log_offset")) lower(i) = kLogOffsetFloor;
  }
}

Mat CovarianceFunction::gram(int c, const std::vector<GpSample>& a) const {
  Mat k = cross(c, a, a);
  return 0.5 * (k + k.transpose());
}

Mat CovarianceFunction::block(const GpSample& x, const GpSample& xp) const {
  return cross(-1, {x}, {xp});
}

// ---------------------------------------------------------------------------

LagrangianCovariance::LagrangianCovariance(std::string name, lip::OperatorKernel op,
                                           std::optional<FrictionOptions> friction)
    : name_(std::move(name)), op_(std::move(op)), friction_(friction) {
  if (friction_) {
    const int n = op_.dof();
    friction_theta_ = Vec::Zero(n * friction_params_per_joint());
    if (friction_->squared_exp) {
      // small SE share at start so the physical part explains most of the data
      for (int j = 0; j < n; ++j) friction_theta_(j * friction_params_per_joint() + 2) = std::log(1e-2);
    }
  }
}

int LagrangianCovariance::friction_params_per_joint() const {
  if (!friction_) return 0;
  return 2 + (friction_->squared_exp ? 1 + 3 * op_.dof() : 0);
}

Vec LagrangianCovariance::log_params() const {
  const Vec k = op_.log_params();
  Vec out(k.size() + friction_theta_.size());
  out << k, friction_theta_;
  return out;
}

std::vector<std::string> LagrangianCovariance::param_names() const {
  auto names = op_.param_names();
  if (friction_) {
    const int n = op_.dof();
    for (int j = 0; j < n; ++j) {
      const std::string base = "friction" + std::to_string(j + 1);
      names.push_back(base + ".log_gamma_v");
      names.push_back(base + ".log_gamma_c");
      if (friction_->squared_exp) {
        names.push_back(base + ".se.log_lambda");
        for (int k = 0; k < 3 * n; ++k) names.push_back(base + ".se.log_sigma" + std::to_string(k));
      }
    }
  }
  return names;
}

std::unique_ptr<CovarianceFunction> LagrangianCovariance::with_log_params(const Vec& theta) const {
  const int kp = op_.num_params();
  require_dim(theta.size(), kp + friction_theta_.size(), "covariance parameters");
  auto out = std::make_unique<LagrangianCovariance>(name_, op_.with_log_params(theta.head(kp)), friction_);
  out->friction_theta_ = theta.tail(friction_theta_.size());
  return out;
}

void LagrangianCovariance::bounds(Vec& lower, Vec& upper) const { CovarianceFunction::bounds(lower, upper); }

int LagrangianCovariance::num_components() const { return op_.num_components() + (friction_ ? op_.dof() : 0); }

int LagrangianCovariance::component_of_param(int p) const {
  const int kp = op_.num_params();
  if (p < kp) return op_.component_of_param(p);
  const int f = p - kp;
  if (!friction_ || f >= friction_theta_.size()) throw std::out_of_range("covariance: parameter index out of range");
  return op_.num_components() + f / friction_params_per_joint();
}

double LagrangianCovariance::friction_value(int joint, const GpSample& x, const GpSample& xp) const {
  const int m = friction_params_per_joint();
  const Vec th = friction_theta_.segment(joint * m, m);
  std::optional<kernel::KernelAtom> se;
  if (friction_->squared_exp) {
    const int n = op_.dof();
    std::vector<int> sel(static_cast<std::size_t>(3 * n));
    for (int k = 0; k < 3 * n; ++k) sel[static_cast<std::size_t>(k)] = k;
    auto atom = kernel::KernelAtom::squared_exponential(sel, th(2));
    atom.log_weights = th.tail(3 * n);
    se = std::move(atom);
  }
  const double gv = friction_->linear ? std::exp(th(0)) : 0.0;
  const double gc = friction_->linear ? std::exp(th(1)) : 0.0;
  return lip::friction_kernel(x.state, xp.state, gv, gc, se, joint);
}

void LagrangianCovariance::fill(int c, const std::vector<GpSample>& a, const std::vector<GpSample>& b, bool symmetric,
                                Mat& out) const {
  const int n = op_.dof();
  const int kc = op_.num_components();
  out = Mat::Zero(static_cast<long>(a.size()) * n, static_cast<long>(b.size()) * n);
  const bool want_op = c < 0 || c < kc;
  const bool want_friction = friction_ && (c < 0 || c >= kc);
  if (want_op) {
    const auto sa = prepare_all(op_, a);
    const auto sb = symmetric ? sa : prepare_all(op_, b);
    const int comp = c < 0 ? -1 : c;
    parallel_for(a.size(), [&](std::size_t lo, std::size_t hi, int) {
      auto ws = op_.make_workspace();
      for (std::size_t i = lo; i < hi; ++i) {
        const std::size_t j0 = symmetric ? i : 0;
        for (std::size_t j = j0; j < b.size(); ++j) {
          op_.add_block(comp, sa[i], sb[j], out.block(static_cast<long>(i) * n, static_cast<long>(j) * n, n, n), ws);
        }
      }
    });
  }
  if (want_friction) {
    for (int joint = 0; joint < n; ++joint) {
      if (c >= 0 && c != kc + joint) continue;
      for (std::size_t i = 0; i < a.size(); ++i) {
        const std::size_t j0 = symmetric ? i : 0;
        for (std::size_t j = j0; j < b.size(); ++j) {
          out(static_cast<long>(i) * n + joint, static_cast<long>(j) * n + joint) += friction_value(joint, a[i], b[j]);
        }
      }
    }
  }
  if (symmetric) {
    // only blocks j >= i were filled; diagonal blocks are complete
    for (std::size_t i = 0; i < a.size(); ++i) {
      for (std::size_t j = 0; j < i; ++j) {
        out.block(static_cast<long>(i) * n, static_cast<long>(j) * n, n, n) =
            out.block(static_cast<long>(j) * n, static_cast<long>(i) * n, n, n).transpose();
      }
    }
    out = 0.5 * (out + out.transpose()).eval();
  }
}

Mat LagrangianCovariance::cross(int c, const std::vector<GpSample>& a, const std::vector<GpSample>& b) const {
  Mat out;
  fill(c, a, b, false, out);
  return out;
}

Mat LagrangianCovariance::gram(int c, const std::vector<GpSample>& a) const {
  Mat out;
  fill(c, a, a, true, out);
  return out;
}

Mat LagrangianCovariance::energy_cross(lip::EnergyPart part, const std::vector<GpSample>& queries,
                                       const std::vector<GpSample>& train) const {
  if (!op_.has_energy_split()) throw UnsupportedOperation("energy estimation requires a kinetic/potential kernel split");
  const int n = op_.dof();
  const auto sq = prepare_all(op_, queries);
  const auto st = prepare_all(op_, train);
  Mat out = Mat::Zero(static_cast<long>(queries.size()), static_cast<long>(train.size()) * n);
  parallel_for(queries.size(), [&](std::size_t lo, std::size_t hi, int) {
    auto ws = op_.make_workspace();
    Vec row(n);
    for (std::size_t i = lo; i < hi; ++i) {
      for (std::size_t j = 0; j < train.size(); ++j) {
        row.setZero();
        op_.add_energy_row(part, sq[i], st[j], row, ws);
        out.block(static_cast<long>(i), static_cast<long>(j) * n, 1, n) = row.transpose();
      }
    }
  });
  return out;
}

Vec LagrangianCovariance::energy_prior(lip::EnergyPart part, const std::vector<GpSample>& queries) const {
  if (!op_.has_energy_split()) throw UnsupportedOperation("energy estimation requires a kinetic/potential kernel split");
  const auto sq = prepare_all(op_, queries);
  Vec out(static_cast<long>(queries.size()));
  parallel_for(queries.size(), [&](std::size_t lo, std::size_t hi, int) {
    auto ws = op_.make_workspace();
    for (std::size_t i = lo; i < hi; ++i) out(static_cast<long>(i)) = op_.energy_prior(part, sq[i], ws);
  });
  return out;
}

// ---------------------------------------------------------------------------

ScalarCovariance::ScalarCovariance(std::string name, int dof, int joint, Extra extra, int regressor_cols)
    : name_(std::move(name)), dof_(dof), joint_(joint), extra_(extra), regressor_cols_(regressor_cols) {
  if (dof < 1 || joint < 0 || joint >= dof) throw DimensionError("scalar covariance: joint index out of range");
  int extra_params = 0;
  if (extra == Extra::Friction) extra_params = 2;
  if (extra == Extra::Regressor) {
    if (regressor_cols < 1) throw DimensionError("scalar covariance: regressor width must be positive");
    extra_params = regressor_cols;
  }
  theta_ = Vec::Zero(num_se() + extra_params);
}

std::vector<std::string> ScalarCovariance::param_names() const {
  std::vector<std::string> names{"se.log_lambda"};
  for (int k = 0; k < 3 * dof_; ++k) names.push_back("se.log_sigma" + std::to_string(k));
  if (extra_ == Extra::Friction) {
    names.emplace_back("friction.log_gamma_v");
    names.emplace_back("friction.log_gamma_c");
  }
  if (extra_ == Extra::Regressor) {
    for (int k = 0; k < regressor_cols_; ++k) names.push_back("regressor.log_gamma" + std::to_string(k));
  }
  return names;
}

std::unique_ptr<CovarianceFunction> ScalarCovariance::with_log_params(const Vec& theta) const {
  require_dim(theta.size(), theta_.size(), "covariance parameters");
  auto out = std::make_unique<ScalarCovariance>(*this);
  out->theta_ = theta;
  return out;
}

void ScalarCovariance::bounds(Vec& lower, Vec& upper) const { CovarianceFunction::bounds(lower, upper); }

void ScalarCovariance::initialize_from_data(const std::vector<GpSample>& xs, const Vec& y) {
  if (xs.empty()) return;
  const Mat cols = stacked_columns(xs, 3 * dof_);
  auto variance = [](const auto& v) {
    const double m = v.mean();
    return (v.array() - m).square().mean();
  };
  theta_(0) = std::log(std::max(variance(y), 1e-6));
  for (int k = 0; k < 3 * dof_; ++k) theta_(1 + k) = std::log(std::max(variance(cols.row(k)), 1e-4));
}

void ScalarCovariance::fill(const std::vector<GpSample>& a, const std::vector<GpSample>& b, bool symmetric,
                            Mat& out) const {
  const int dim = 3 * dof_;
  out.resize(static_cast<long>(a.size()), static_cast<long>(b.size()));
  const Mat bcols = stacked_columns(b, dim);
  Vec w(dim);
  for (int k = 0; k < dim; ++k) w(k) = std::exp(-theta_(1 + k));
  const double log_lambda = theta_(0);
  const long nb = static_cast<long>(b.size());
  // b is stored column-major (dim x nb): coordinate k of sample j at k + j*dim;
  // the SIMD kernel wants structure-of-arrays, so transpose once.
  const Mat soa = bcols.transpose();
  parallel_for(a.size(), [&](std::size_t lo, std::size_t hi, int) {
    Vec x(dim), d(nb);
    for (std::size_t i = lo; i < hi; ++i) {
      x = lip::stacked_input(a[i].state);
      simd::weighted_sq_dists(as_span(x), soa.data(), static_cast<std::size_t>(nb), as_span(w),
                              std::span<double>(d.data(), static_cast<std::size_t>(nb)));
      out.row(static_cast<long>(i)) = (log_lambda - d.array()).exp().matrix().transpose();
    }
  });
  if (extra_ == Extra::Friction) {
    const double gv = std::exp(theta_(num_se())), gc = std::exp(theta_(num_se() + 1));
    for (std::size_t i = 0; i < a.size(); ++i) {
      const auto fa = lip::friction_features(a[i].state, joint_);
      for (std::size_t j = 0; j < b.size(); ++j) {
        const auto fb = lip::friction_features(b[j].state, joint_);
        out(static_cast<long>(i), static_cast<long>(j)) += gv * fa(0) * fb(0) + gc * fa(1) * fb(1);
      }
    }
  }
  if (extra_ == Extra::Regressor) {
    const Vec gamma = theta_.tail(regressor_cols_).array().exp();
    Mat pa(static_cast<long>(a.size()), regressor_cols_), pb(nb, regressor_cols_);
    for (std::size_t i = 0; i < a.size(); ++i) {
      require_dim(a[i].regressor.cols(), regressor_cols_, "regressor width");
      pa.row(static_cast<long>(i)) = a[i].regressor.row(joint_);
    }
    for (std::size_t j = 0; j < b.size(); ++j) {
      require_dim(b[j].regressor.cols(), regressor_cols_, "regressor width");
      pb.row(static_cast<long>(j)) = b[j].regressor.row(joint_);
    }
    out.noalias() += pa * gamma.asDiagonal() * pb.transpose();
  }
  if (symmetric) out = 0.5 * (out + out.transpose()).eval();
}

Mat ScalarCovariance::cross(int c, const std::vector<GpSample>& a, const std::vector<GpSample>& b) const {
  if (c > 0) throw std::out_of_range("scalar covariance has a single component");
  Mat out;
  fill(a, b, false, out);
  return out;
}

Mat ScalarCovariance::gram(int c, const std::vector<GpSample>& a) const {
  if (c > 0) throw std::out_of_range("scalar covariance has a single component");
  Mat out;
  fill(a, a, true, out);
  return out;
}

// ---------------------------------------------------------------------------

DiagonalOperatorCovariance::DiagonalOperatorCovariance(std::string name, lip::OperatorKernel op, int joint)
    : name_(std::move(name)), op_(std::move(op)), joint_(joint) {
  if (joint < 0 || joint >= op_.dof()) throw DimensionError("diagonal operator covariance: joint out of range");
}

std::unique_ptr<CovarianceFunction> DiagonalOperatorCovariance::with_log_params(const Vec& theta) const {
  return std::make_unique<DiagonalOperatorCovariance>(name_, op_.with_log_params(theta), joint_);
}

Mat DiagonalOperatorCovariance::cross(int c, const std::vector<GpSample>& a, const std::vector<GpSample>& b) const {
  const int n = op_.dof();
  const auto sa = prepare_all(op_, a);
  const auto sb = prepare_all(op_, b);
  Mat out(static_cast<long>(a.size()), static_cast<long>(b.size()));
  parallel_for(a.size(), [&](std::size_t lo, std::size_t hi, int) {
    auto ws = op_.make_workspace();
    Mat blk(n, n);
    for (std::size_t i = lo; i < hi; ++i) {
      for (std::size_t j = 0; j < b.size(); ++j) {
        blk.setZero();
        op_.add_block(c, sa[i], sb[j], blk, ws);
        out(static_cast<long>(i), static_cast<long>(j)) = blk(joint_, joint_);
      }
    }
  });
  return out;
}

}  // namespace lipgp::gp
