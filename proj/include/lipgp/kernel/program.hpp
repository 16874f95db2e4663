#pragma once

#include "lipgp/kernel/expr.hpp"
#include "lipgp/kernel/jet.hpp"

#include <span>
#include <string>
#include <vector>

namespace lipgp::kernel {

/// How a kernel coordinate is obtained from the raw differentiation variables.
enum class CoordMap { Identity, Cos, Sin };

struct InputCoordinate {
  int var = 0;
  CoordMap map = CoordMap::Identity;
};

struct InputMap {
  int num_vars = 0;
  std::vector<InputCoordinate> coords;

  /// Coordinates are the variables themselves.
  static InputMap identity(int dim);
  void validate() const;
};

/// Coordinate values with first and second derivatives with respect to their
/// variable, for one kernel argument. Layout: [value, d1, d2] per coordinate.
struct SideData {
  std::vector<double> c;
  std::vector<double> vars;
};

/// A kernel expression compiled into a fixed evaluation schedule of bi-jets.
///
/// Every node is evaluated on the smallest jet layout covering the variables it
/// depends on; products of factors with disjoint supports cost one multiply
/// per output coefficient. The result of `evaluate` holds all mixed partials
/// of order <= `order` in each argument with respect to the raw variables.
class DerivativeProgram {
 public:
  class Workspace {
   public:
    Workspace() = default;

   private:
    friend class DerivativeProgram;
    std::vector<double> buf_;
  };

  DerivativeProgram(const KernelExpr& expr, InputMap map, int order = 2);

  const InputMap& input_map() const { return map_; }
  int order() const { return order_; }
  int root() const { return root_; }
  const JetLayout& layout(int node) const { return nodes_[static_cast<std::size_t>(node)].layout; }
  /// Node index of the first node carrying `tag`, or -1.
  int find_tag(const std::string& tag) const;

  Workspace make_workspace() const;
  SideData prepare(std::span<const double> vars) const;

  /// Evaluates all nodes; returns the root bi-jet (layout(root()) squared).
  const double* evaluate(const SideData& a, const SideData& b, Workspace& ws) const;
  /// Bi-jet of a node from the most recent `evaluate` on `ws`.
  const double* result(int node, const Workspace& ws) const;

 private:
  struct Step {
    int child = -1;
    JetLayout layout;
    bool disjoint = true;
    std::vector<int> from_a, from_b;        // disjoint split plan
    std::vector<int> embed_acc, embed_arg;  // overlapping: embeddings into `layout`
    std::size_t out = 0, tmp_a = 0, tmp_b = 0;
  };

  struct Node {
    KernelExpr::Op op = KernelExpr::Op::Atom;
    JetLayout layout;
    std::string tag;
    // atoms
    AtomKind kind = AtomKind::SquaredExponential;
    int degree = 1;
    std::vector<int> coords, coord_local;
    std::vector<double> weights;  // s_k, or 1 / Sigma_k for SE
    double log_scale = 0.0, offset = 0.0;
    // sums and products
    std::vector<int> children;
    std::vector<std::vector<int>> embeds;
    std::vector<Step> steps;
    std::size_t out = 0, scratch = 0;
  };

  int compile(const KernelExpr& e);
  void eval_atom(const Node& node, const SideData& a, const SideData& b, double* ws) const;
  void eval_node(int index, const SideData& a, const SideData& b, double* ws) const;
  std::size_t reserve(std::size_t count);

  InputMap map_;
  int order_;
  std::vector<Node> nodes_;
  int root_ = -1;
  std::size_t workspace_size_ = 0;
};

/// Kernel value k(x, x') with coordinates taken as plain inputs.
double eval(const KernelExpr& k, std::span<const double> x, std::span<const double> xp);

/// d^{|alpha|+|beta|} k / dx^alpha dx'^beta, with alpha and beta given as lists
/// of coordinate indices (repeats allowed, at most two per side).
double mixed_partial(const KernelExpr& k, std::span<const double> x, std::span<const double> xp,
                     std::span<const int> alpha, std::span<const int> beta);

/// Gram matrix K_ij = k(x_i, x_j).
Mat gram(const KernelExpr& k, const std::vector<Vec>& xs);

}  // namespace lipgp::kernel
