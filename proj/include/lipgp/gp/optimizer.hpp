#pragma once

#include "lipgp/common.hpp"

#include <functional>
#include <string>

namespace lipgp::gp {

struct OptimizerOptions {
  int max_iterations = 200;
  double grad_tolerance = 1e-6;  // infinity norm of the projected gradient
  /// Stop when an accepted step improves f by less than f_tolerance * max(1, |f|); 0 disables.
  double f_tolerance = 0.0;
  double fd_step = 1e-5;
  int max_backtracks = 30;
};

struct OptimizerResult {
  Vec theta;
  double value = 0.0;
  int iterations = 0;
  int evaluations = 0;
  bool converged = false;
  bool warning = false;  // line search failed or non-finite values encountered
  std::string message;
};

/// Objective with a finite-difference gradient. `value(theta, commit)` may use
/// `commit = false` for probe points that should not replace cached state.
struct Objective {
  std::function<double(const Vec&, bool)> value;
  /// Optional specialised gradient; central differences on `value` otherwise.
  std::function<Vec(const Vec&, double, const Vec&, const Vec&)> gradient;
};

/// Central-difference gradient; steps that would leave [lower, upper] are
/// clamped and the difference is divided by the actual step taken.
Vec fd_gradient(const std::function<double(const Vec&, int)>& f, const Vec& theta, double h, const Vec& lower,
                const Vec& upper);

/// Box-constrained BFGS ascent (projection onto the box, Armijo backtracking).
/// Returns the best point seen; never returns a value below f(theta0).
OptimizerResult maximize(const Objective& objective, const Vec& theta0, const Vec& lower, const Vec& upper,
                         const OptimizerOptions& options = {});

}  // namespace lipgp::gp
