#pragma once

#include "lipgp/common.hpp"

#include <span>
#include <string>
#include <vector>

namespace lipgp::kernel {

enum class AtomKind { SquaredExponential, InhomogeneousPoly, HomogeneousPoly };

/// Base kernel on a selection of input coordinates. Parameters live in log-space:
///   SE:          lambda * exp(-sum_k (x_k - x'_k)^2 / Sigma_k)      [log lambda, log Sigma_1..K]
///   inhom. poly: (sum_k s_k x_k x'_k + sigma)^p                     [log s_1..K, log sigma]
///   hom. poly:   (sum_k s_k x_k x'_k)^p                             [log s_1..K]
struct KernelAtom {
  AtomKind kind = AtomKind::SquaredExponential;
  int degree = 1;
  std::vector<int> selector;
  Vec log_weights;  // Sigma_k for SE, s_k for polynomials
  double log_scale = 0.0;   // lambda (SE only)
  double log_offset = 0.0;  // sigma (inhomogeneous only)

  static KernelAtom squared_exponential(std::vector<int> selector, double log_scale = 0.0,
                                        double log_lengthscale = 0.0);
  static KernelAtom inhomogeneous_poly(std::vector<int> selector, int degree);
  static KernelAtom homogeneous_poly(std::vector<int> selector, int degree);

  int num_params() const;
  void validate() const;
  double value(std::span<const double> x, std::span<const double> xp) const;
};

/// Kernel expression tree of atoms combined by sums and products. Nodes may
/// carry a tag so that sub-kernels can be retrieved after compilation.
class KernelExpr {
 public:
  enum class Op { Atom, Sum, Product };

  static KernelExpr atom(KernelAtom a, std::string tag = {});
  static KernelExpr sum(std::vector<KernelExpr> children, std::string tag = {});
  static KernelExpr product(std::vector<KernelExpr> children, std::string tag = {});

  Op op() const { return op_; }
  const KernelAtom& atom_data() const { return atom_; }
  const std::vector<KernelExpr>& children() const { return children_; }
  const std::string& tag() const { return tag_; }

  /// Highest coordinate index referenced plus one.
  int input_dim() const;
  int num_params() const;
  Vec log_params() const;
  KernelExpr with_log_params(const Vec& theta) const;
  std::vector<std::string> param_names(const std::string& prefix = "") const;

  /// Plain recursive evaluation (no derivatives).
  double value(std::span<const double> x, std::span<const double> xp) const;

  /// First tagged node with the given tag, or nullptr.
  const KernelExpr* find(const std::string& tag) const;

 private:
  KernelExpr() = default;
  void assign_params(const Vec& theta, int& pos);

  Op op_ = Op::Atom;
  KernelAtom atom_;
  std::vector<KernelExpr> children_;
  std::string tag_;
};

}  // namespace lipgp::kernel
