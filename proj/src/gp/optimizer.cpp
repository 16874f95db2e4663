#include "lipgp/gp/optimizer.hpp"

#include <cmath>
#include <limits>

namespace lipgp::gp {

namespace {

Vec clamp(const Vec& x, const Vec& lo, const Vec& hi) { return x.cwiseMax(lo).cwiseMin(hi); }

// Zero the components that point out of the box at active bounds.
Vec projected(const Vec& g, const Vec& x, const Vec& lo, const Vec& hi) {
  Vec p = g;
  for (long i = 0; i < x.size(); ++i) {
    if ((x(i) <= lo(i) && g(i) < 0.0) || (x(i) >= hi(i) && g(i) > 0.0)) p(i) = 0.0;
  }
  return p;
}

}  // namespace

Vec fd_gradient(const std::function<double(const Vec&, int)>& f, const Vec& theta, double h, const Vec& lower,
                const Vec& upper) {
  Vec g(theta.size());
  for (long p = 0; p < theta.size(); ++p) {
    Vec a = theta, b = theta;
    a(p) = std::min(theta(p) + h, upper(p));
    b(p) = std::max(theta(p) - h, lower(p));
    const double step = a(p) - b(p);
    if (step <= 0.0) {
      g(p) = 0.0;
      continue;
    }
    const double fa = f(a, static_cast<int>(p)), fb = f(b, static_cast<int>(p));
    g(p) = (std::isfinite(fa) && std::isfinite(fb)) ? (fa - fb) / step : 0.0;
  }
  return g;
}

OptimizerResult maximize(const Objective& objective, const Vec& theta0, const Vec& lower, const Vec& upper,
                         const OptimizerOptions& options) {
  require_dim(lower.size(), theta0.size(), "lower bounds");
  require_dim(upper.size(), theta0.size(), "upper bounds");
  if (!theta0.allFinite()) throw std::invalid_argument("optimizer: non-finite initial point");
  const long p = theta0.size();

  OptimizerResult r;
  auto eval = [&](const Vec& x) {
    ++r.evaluations;
    const double v = objective.value(x, true);
    return std::isfinite(v) ? v : -std::numeric_limits<double>::infinity();
  };
  auto grad = [&](const Vec& x) -> Vec {
    if (objective.gradient) return objective.gradient(x, options.fd_step, lower, upper);
    return fd_gradient(
        [&](const Vec& y, int) {
          ++r.evaluations;
          return objective.value(y, false);
        },
        x, options.fd_step, lower, upper);
  };

  Vec x = clamp(theta0, lower, upper);
  double fx = eval(x);
  r.theta = x;
  r.value = fx;
  if (!std::isfinite(fx)) {
    r.warning = true;
    r.message = "objective not finite at the initial point";
    return r;
  }
  if (p == 0) {
    r.converged = true;
    return r;
  }
  Vec g = grad(x);
  Mat h = Mat::Identity(p, p);
  bool fresh = true;  // h is the identity

  for (r.iterations = 0; r.iterations < options.max_iterations; ++r.iterations) {
    const Vec pg = projected(g, x, lower, upper);
    if (pg.lpNorm<Eigen::Infinity>() < options.grad_tolerance) {
      r.converged = true;
      r.message = "gradient tolerance reached";
      break;
    }
    Vec d = projected(h * g, x, lower, upper);
    if (g.dot(d) <= 0.0) {
      h.setIdentity();
      fresh = true;
      d = pg;
    }
    double t = fresh ? std::min(1.0, 1.0 / d.norm()) : 1.0;
    bool accepted = false;
    Vec xn;
    double fn = 0.0;
    for (int k = 0; k < options.max_backtracks; ++k, t *= 0.5) {
      xn = clamp(x + t * d, lower, upper);
      if ((xn - x).norm() == 0.0) break;
      fn = eval(xn);
      if (fn >= fx + 1e-4 * g.dot(xn - x) && fn > fx) {
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      if (!fresh) {
        h.setIdentity();
        fresh = true;
        --r.iterations;
        continue;
      }
      r.warning = true;
      r.message = "line search failed";
      break;
    }
    const Vec s = xn - x;
    const Vec gn = grad(xn);
    const Vec y = g - gn;  // gradient change of -f
    const double improvement = fn - fx;
    x = xn;
    g = gn;
    if (fn > r.value) {
      r.value = fn;
      r.theta = x;
    }
    fx = fn;
    const double sy = s.dot(y);
    if (sy > 1e-10 * s.norm() * y.norm()) {
      if (fresh) h *= sy / y.squaredNorm();
      const double rho = 1.0 / sy;
      const Mat a = Mat::Identity(p, p) - rho * s * y.transpose();
      h = a * h * a.transpose() + rho * s * s.transpose();
      fresh = false;
    }
    if (options.f_tolerance > 0.0 && improvement < options.f_tolerance * std::max(1.0, std::abs(fx))) {
      r.converged = true;
      r.message = "function tolerance reached";
      ++r.iterations;
      break;
    }
  }
  if (r.iterations >= options.max_iterations && r.message.empty()) r.message = "iteration limit reached";
  // leave the objective's cache at the returned point
  if (r.theta != x) objective.value(r.theta, true);
  return r;
}

}  // namespace lipgp::gp
