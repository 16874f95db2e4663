#include "lipgp/gp/factor.hpp"

#include <Eigen/Eigenvalues>
#include <lapacke.h>

#include <cmath>
#include <sstream>

namespace lipgp::gp {

namespace {

bool try_potrf(Mat& a) {
  if (a.rows() == 0) return true;
  const auto n = static_cast<lapack_int>(a.rows());
  return LAPACKE_dpotrf(LAPACK_COL_MAJOR, 'L', n, a.data(), n) == 0;
}

}  // namespace

CholeskyFactor CholeskyFactor::compute(const Mat& a, const JitterPolicy& policy) {
  if (a.rows() != a.cols()) throw DimensionError("cholesky: matrix must be square");
  if (!a.allFinite()) throw NotPositiveDefinite("cholesky: matrix has non-finite entries", std::nan(""));
  const long n = a.rows();
  const double mean_diag = n > 0 ? a.diagonal().mean() : 0.0;
  const double scale = mean_diag > 0.0 ? mean_diag : 1.0;

  CholeskyFactor f;
  std::vector<double> jitters;
  if (policy.try_zero_first) jitters.push_back(0.0);
  for (double j = policy.start; j <= policy.max * (1.0 + 1e-12); j *= policy.growth) jitters.push_back(j * scale);
  for (double jit : jitters) {
    f.l_ = a;
    if (jit > 0.0) f.l_.diagonal().array() += jit;
    if (try_potrf(f.l_)) {
      f.jitter_ = jit;
      f.l_.triangularView<Eigen::StrictlyUpper>().setZero();
      return f;
    }
  }
  double min_eig = std::nan("");
  if (policy.report_eigenvalue && n > 0) {
    Eigen::SelfAdjointEigenSolver<Mat> es(a, Eigen::EigenvaluesOnly);
    min_eig = es.eigenvalues().minCoeff();
  }
  std::ostringstream msg;
  msg << "cholesky: matrix not positive definite after jitter " << policy.max << " x mean diagonal (min eigenvalue "
      << min_eig << ")";
  throw NotPositiveDefinite(msg.str(), min_eig);
}

double CholeskyFactor::log_det() const { return 2.0 * l_.diagonal().array().log().sum(); }

Vec CholeskyFactor::solve(const Vec& b) const {
  require_dim(b.size(), size(), "cholesky solve rhs");
  return l_.triangularView<Eigen::Lower>().transpose().solve(l_.triangularView<Eigen::Lower>().solve(b));
}

Mat CholeskyFactor::solve(const Mat& b) const {
  require_dim(b.rows(), size(), "cholesky solve rhs");
  return l_.triangularView<Eigen::Lower>().transpose().solve(l_.triangularView<Eigen::Lower>().solve(b));
}

Mat CholeskyFactor::solve_lower(const Mat& b) const {
  require_dim(b.rows(), size(), "cholesky solve rhs");
  return l_.triangularView<Eigen::Lower>().solve(b);
}

}  // namespace lipgp::gp
