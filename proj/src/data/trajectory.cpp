#include "lipgp/data/trajectory.hpp"

#include "lipgp/data/random.hpp"

#include <cmath>

namespace lipgp::data {

int SinusoidSpec::num_samples() const { return static_cast<int>(std::llround(duration * sample_rate)); }

void SinusoidSpec::validate() const {
  if (harmonics < 1) throw std::invalid_argument("sinusoid spec: harmonics must be >= 1");
  if (!(omega_f > 0.0)) throw std::invalid_argument("sinusoid spec: omega_f must be positive");
  if (!(sample_rate > 0.0)) throw std::invalid_argument("sinusoid spec: sample_rate must be positive");
  if (!(amplitude >= 0.0)) throw std::invalid_argument("sinusoid spec: amplitude must be non-negative");
  if (num_samples() < 1) throw std::invalid_argument("sinusoid spec: duration yields no samples");
}

void JointLimits::validate() const {
  const long n = q_min.size();
  if (q_max.size() != n || qd_max.size() != n || qdd_max.size() != n) {
    throw DimensionError("joint limits: inconsistent vector lengths");
  }
  for (long i = 0; i < n; ++i) {
    if (!(q_min(i) < q_max(i))) throw std::invalid_argument("joint limits: q_min must be < q_max");
    if (!(qd_max(i) > 0.0) || !(qdd_max(i) > 0.0)) {
      throw std::invalid_argument("joint limits: velocity and acceleration limits must be positive");
    }
  }
}

bool JointLimits::admits(const robot::JointState& s, double tol) const {
  for (long i = 0; i < q_min.size(); ++i) {
    const double slack_q = tol * (1.0 + std::abs(q_max(i)) + std::abs(q_min(i)));
    if (s.q(i) < q_min(i) - slack_q || s.q(i) > q_max(i) + slack_q) return false;
    if (std::abs(s.qd(i)) > qd_max(i) * (1.0 + tol)) return false;
    if (std::abs(s.qdd(i)) > qdd_max(i) * (1.0 + tol)) return false;
  }
  return true;
}

JointLimits JointLimits::uniform(int n, double q, double qd, double qdd) {
  return JointLimits{Vec::Constant(n, -q), Vec::Constant(n, q), Vec::Constant(n, qd), Vec::Constant(n, qdd)};
}

namespace {

struct Coefficients {
  Mat a, b;  // n x harmonics
};

void evaluate(const Coefficients& c, const Vec& center, double omega, double scale, double t,
              robot::JointState& s) {
  const long n = c.a.rows();
  s.q = center;
  s.qd = Vec::Zero(n);
  s.qdd = Vec::Zero(n);
  for (long l = 1; l <= c.a.cols(); ++l) {
    const double w = omega * static_cast<double>(l);
    const double sw = std::sin(w * t), cw = std::cos(w * t);
    for (long i = 0; i < n; ++i) {
      const double a = scale * c.a(i, l - 1), b = scale * c.b(i, l - 1);
      s.q(i) += (a * sw - b * cw) / w;
      s.qd(i) += a * cw + b * sw;
      s.qdd(i) += w * (-a * sw + b * cw);
    }
  }
}

}  // namespace

Trajectory generate_trajectory(const SinusoidSpec& spec, const JointLimits& limits, int n) {
  spec.validate();
  limits.validate();
  require_dim(limits.dof(), n, "joint limits");

  Rng rng(spec.seed);
  Coefficients c{Mat(n, spec.harmonics), Mat(n, spec.harmonics)};
  for (int i = 0; i < n; ++i) {
    for (int l = 0; l < spec.harmonics; ++l) {
      c.a(i, l) = rng.uniform(-spec.amplitude, spec.amplitude);
      c.b(i, l) = rng.uniform(-spec.amplitude, spec.amplitude);
    }
  }
  const Vec center = 0.5 * (limits.q_min + limits.q_max);
  const Vec half = 0.5 * (limits.q_max - limits.q_min);

  Trajectory traj;
  const int count = spec.num_samples();
  traj.time.resize(static_cast<std::size_t>(count));
  traj.states.resize(static_cast<std::size_t>(count));
  for (int k = 0; k < count; ++k) traj.time[static_cast<std::size_t>(k)] = k / spec.sample_rate;

  double scale = 1.0;
  for (int attempt = 0; attempt < 8; ++attempt) {
    double worst = 0.0;
    for (int k = 0; k < count; ++k) {
      auto& s = traj.states[static_cast<std::size_t>(k)];
      evaluate(c, center, spec.omega_f, scale, traj.time[static_cast<std::size_t>(k)], s);
      for (int i = 0; i < n; ++i) {
        worst = std::max({worst, std::abs(s.q(i) - center(i)) / half(i), std::abs(s.qd(i)) / limits.qd_max(i),
                          std::abs(s.qdd(i)) / limits.qdd_max(i)});
      }
    }
    if (!std::isfinite(worst)) break;
    if (worst <= 1.0) {
      traj.scale = scale;
      return traj;
    }
    // everything is linear in the coefficients; the margin absorbs rounding
    scale *= (1.0 - 1e-12) / worst;
  }
  throw std::runtime_error("generate_trajectory: limits cannot be satisfied by rescaling");
}

}  // namespace lipgp::data
