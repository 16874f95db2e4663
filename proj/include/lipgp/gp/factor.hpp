#pragma once

#include "lipgp/common.hpp"

#include <stdexcept>

namespace lipgp::gp {

/// Raised when a matrix stays indefinite after the largest jitter.
class NotPositiveDefinite : public std::runtime_error {
 public:
  NotPositiveDefinite(const std::string& what, double min_eigenvalue)
      : std::runtime_error(what), min_eigenvalue_(min_eigenvalue) {}
  double min_eigenvalue() const { return min_eigenvalue_; }

 private:
  double min_eigenvalue_;
};

struct JitterPolicy {
  double start = 1e-10;  // relative to the mean diagonal
  double growth = 10.0;
  double max = 1e-4;
  bool try_zero_first = true;
  bool report_eigenvalue = true;  // eigen-decompose on failure (costly)
};

/// Cholesky factor of a symmetric matrix plus the jitter that made it PD.
class CholeskyFactor {
 public:
  CholeskyFactor() = default;
  static CholeskyFactor compute(const Mat& a, const JitterPolicy& policy = {});

  long size() const { return l_.rows(); }
  /// Lower-triangular factor (upper part is unspecified).
  const Mat& lower() const { return l_; }
  double jitter() const { return jitter_; }
  double log_det() const;
  Vec solve(const Vec& b) const;
  Mat solve(const Mat& b) const;
  /// L^{-1} b
  Mat solve_lower(const Mat& b) const;

 private:
  Mat l_;
  double jitter_ = 0.0;
};

}  // namespace lipgp::gp
