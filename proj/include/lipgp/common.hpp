#pragma once

#include <Eigen/Dense>

#include <span>
#include <stdexcept>
#include <string>

namespace lipgp {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

/// Raised when input shapes disagree with the model they are applied to.
class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Raised when an operation is requested on an object that does not support it
/// (e.g. energy estimation on a model trained without the LIP kernel).
class UnsupportedOperation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

inline void require_dim(long got, long expected, const char* what) {
  if (got != expected) {
    throw DimensionError(std::string(what) + ": expected length " + std::to_string(expected) +
                         ", got " + std::to_string(got));
  }
}

inline std::span<const double> as_span(const Vec& v) {
  return {v.data(), static_cast<std::size_t>(v.size())};
}

/// sign(0) == 0, matching the friction model of the oracle and the kernel features.
inline double signum(double v) { return (v > 0.0) - (v < 0.0); }

}  // namespace lipgp
