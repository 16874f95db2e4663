#pragma once

#include "lipgp/robot/model.hpp"

#include <cstdint>
#include <vector>

namespace lipgp::data {

/// Sum-of-sinusoids excitation:
///   q_i(t) = center_i + sum_{l=1..N_s} a/(w l) sin(w l t) - b/(w l) cos(w l t),
/// with a, b ~ U[-c, c] drawn per harmonic and joint.
struct SinusoidSpec {
  int harmonics = 50;
  double omega_f = 0.02;   // rad/s
  double amplitude = 1.0;  // c, before limit rescaling
  std::uint64_t seed = 0;
  double duration = 50.0;     // s
  double sample_rate = 10.0;  // Hz

  int num_samples() const;
  void validate() const;
};

struct JointLimits {
  Vec q_min, q_max, qd_max, qdd_max;

  int dof() const { return static_cast<int>(q_min.size()); }
  void validate() const;
  bool admits(const robot::JointState& s, double tol = 1e-12) const;
  /// Symmetric limits [-q, q], [-qd, qd], [-qdd, qdd], broadcast to n joints.
  static JointLimits uniform(int n, double q, double qd, double qdd);
};

struct Trajectory {
  std::vector<double> time;
  std::vector<robot::JointState> states;
  double scale = 1.0;  // factor applied to the drawn coefficients to satisfy the limits

  std::size_t size() const { return states.size(); }
};

/// Positions are centred on the midpoint of [q_min, q_max]; velocities and
/// accelerations come from term-wise differentiation. Coefficients are scaled
/// down by the worst limit-violation ratio until every sample is admissible.
Trajectory generate_trajectory(const SinusoidSpec& spec, const JointLimits& limits, int n);

}  // namespace lipgp::data
