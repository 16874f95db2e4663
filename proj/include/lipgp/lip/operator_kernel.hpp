#pragma once

#include "lipgp/kernel/program.hpp"
#include "lipgp/lip/lip_kernel.hpp"

#include <memory>
#include <vector>

namespace lipgp::lip {

/// Torque covariance obtained by applying the Lagrangian operator
///   G_i f = sum_j (d2f/dqd_i dqd_j qdd_j + d2f/dqd_i dq_j qd_j) - df/dq_i
/// to both arguments of a Lagrangian kernel: block(i, j) = G_i G'_j k^L.
class OperatorKernel {
 public:
  struct Side {
    kernel::SideData data;
    Vec qd, qdd;
  };

  class Workspace {
   public:
    Workspace() = default;

   private:
    friend class OperatorKernel;
    std::vector<kernel::DerivativeProgram::Workspace> ws_;
  };

  OperatorKernel(std::vector<robot::JointKind> kinds, std::vector<LagrangianComponent> comps);

  int dof() const { return coords_.dof; }
  const std::vector<robot::JointKind>& kinds() const { return kinds_; }
  int num_components() const { return static_cast<int>(comps_.size()); }
  const LagrangianComponent& component(int c) const { return comps_[static_cast<std::size_t>(c)]; }
  const std::vector<LagrangianComponent>& components() const { return comps_; }
  bool has_energy_split() const;

  int num_params() const;
  Vec log_params() const;
  OperatorKernel with_log_params(const Vec& theta) const;
  int component_of_param(int p) const;
  std::vector<std::string> param_names() const;

  Side prepare(const robot::JointState& s) const;
  Workspace make_workspace() const;

  /// out += block of component `c` (all components when c < 0).
  void add_block(int c, const Side& x, const Side& xp, Eigen::Ref<Mat> out, Workspace& ws) const;
  Mat torque_kernel_block(const robot::JointState& x, const robot::JointState& xp) const;

  /// Cov[T(x), tau(x')] or Cov[V(x), tau(x')] as a length-n row (the potential
  /// row carries the minus sign of L = T - V).
  void add_energy_row(EnergyPart which, const Side& x, const Side& xp, Eigen::Ref<Vec> out, Workspace& ws) const;
  Vec energy_cross_row(EnergyPart which, const robot::JointState& x, const robot::JointState& xp) const;
  /// Prior variance k^T(x, x) or k^V(x, x).
  double energy_prior(EnergyPart which, const Side& x, Workspace& ws) const;

 private:
  struct Slots {
    // per joint i: slot of d2/dqd_i dqd_l, d2/dqd_i dq_l (per l) and d/dq_i; -1 if absent
    std::vector<std::vector<int>> qdqd, qdq;
    std::vector<int> q;
  };
  struct Entry {
    int slot;
    double coeff;
  };

  void operator_rows(const Slots& s, const Side& side, std::vector<std::vector<Entry>>& rows) const;

  std::vector<robot::JointKind> kinds_;
  LagrangianCoordinates coords_;
  std::vector<LagrangianComponent> comps_;
  std::vector<std::shared_ptr<const kernel::DerivativeProgram>> programs_;
  std::vector<Slots> slots_;
};

}  // namespace lipgp::lip
