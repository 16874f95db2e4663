#include "lipgp/lip/lip_kernel.hpp"

namespace lipgp::lip {

using kernel::KernelAtom;
using kernel::KernelExpr;

std::vector<LagrangianComponent> lip_components(const std::vector<robot::JointKind>& kinds) {
  const LagrangianCoordinates coords(kinds);
  const int n = coords.dof;
  if (n < 1) throw std::invalid_argument("LIP kernel needs at least one joint");
  std::vector<LagrangianComponent> out;
  for (int i = 0; i < n; ++i) {
    std::vector<int> vel;
    for (int b = 0; b <= i; ++b) vel.push_back(coords.velocity[static_cast<std::size_t>(b)]);
    std::vector<KernelExpr> factors{KernelExpr::atom(KernelAtom::homogeneous_poly(vel, 2))};
    for (int b = 0; b <= i; ++b) factors.push_back(KernelExpr::atom(KernelAtom::inhomogeneous_poly(coords.position_block(b), 2)));
    out.push_back({KernelExpr::product(std::move(factors), "T" + std::to_string(i + 1)), EnergyPart::Kinetic});
  }
  std::vector<KernelExpr> factors;
  for (int b = 0; b < n; ++b) factors.push_back(KernelExpr::atom(KernelAtom::inhomogeneous_poly(coords.position_block(b), 1)));
  out.push_back({KernelExpr::product(std::move(factors), "V"), EnergyPart::Potential});
  return out;
}

std::vector<LagrangianComponent> lse_components(const std::vector<robot::JointKind>& kinds, double log_scale,
                                                double log_lengthscale) {
  const LagrangianCoordinates coords(kinds);
  std::vector<int> all(coords.map.coords.size());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = static_cast<int>(i);
  return {{KernelExpr::atom(KernelAtom::squared_exponential(all, log_scale, log_lengthscale), "L"),
           EnergyPart::Lagrangian}};
}

KernelExpr lagrangian_expr(const std::vector<LagrangianComponent>& comps) {
  std::vector<KernelExpr> kinetic, potential, other;
  for (const auto& c : comps) {
    (c.part == EnergyPart::Kinetic ? kinetic : c.part == EnergyPart::Potential ? potential : other).push_back(c.expr);
  }
  std::vector<KernelExpr> terms;
  if (!kinetic.empty()) terms.push_back(KernelExpr::sum(std::move(kinetic), "kinetic"));
  if (!potential.empty()) terms.push_back(KernelExpr::sum(std::move(potential), "potential"));
  for (auto& o : other) terms.push_back(std::move(o));
  return KernelExpr::sum(std::move(terms));
}

Vec lagrangian_coordinates(const robot::JointState& s, const std::vector<robot::JointKind>& kinds) {
  const auto t = transform_input(s.q, s.qd, s.qdd, kinds);
  Vec c(t.qc.size() + t.qs.size() + t.qp.size() + t.qd.size());
  c << t.qc, t.qs, t.qp, t.qd;
  return c;
}

double lagrangian_kernel(const std::vector<LagrangianComponent>& comps, const std::vector<robot::JointKind>& kinds,
                         const robot::JointState& x, const robot::JointState& xp) {
  const Vec a = lagrangian_coordinates(x, kinds), b = lagrangian_coordinates(xp, kinds);
  double k = 0.0;
  for (const auto& c : comps) k += c.expr.value(as_span(a), as_span(b));
  return k;
}

}  // namespace lipgp::lip
