#pragma once

#include <span>
#include <vector>

namespace lipgp::kernel {

/// Slot layout of a truncated multivariate Taylor carrier over a sorted set of
/// variable ids (the support). Slots hold derivatives, not Taylor coefficients:
///   [value, d/dv_0 .. d/dv_{s-1}, d2/dv_a dv_b for a <= b (row-major upper triangle)].
/// Order 0 keeps only the value, order 1 adds the gradient.
class JetLayout {
 public:
  struct Term {
    int out, lhs, rhs;
    double weight;
  };

  JetLayout() : JetLayout({}, 2) {}
  JetLayout(std::vector<int> support, int order);

  int size() const { return size_; }
  int order() const { return order_; }
  const std::vector<int>& support() const { return support_; }
  int num_vars() const { return static_cast<int>(support_.size()); }

  /// Position of variable `var` in the support, or -1.
  int local(int var) const;
  int grad_slot(int local_index) const { return 1 + local_index; }
  int hess_slot(int la, int lb) const;
  /// Slot of the derivative with respect to the listed variables (0, 1 or 2 ids,
  /// repeats allowed), or -1 if the layout cannot hold it.
  int slot_of(std::span<const int> vars) const;

  /// Leibniz table: (fg)[out] = sum weight * f[lhs] * g[rhs].
  const std::vector<Term>& terms() const { return terms_; }

  /// For each slot of `sub`, the matching slot of this layout (-1 if the
  /// support of `sub` is not contained in this one).
  std::vector<int> embedding_of(const JetLayout& sub) const;

  /// For a layout whose support is the disjoint union of a and b: for each slot
  /// the pair of slots (in a, in b) whose product gives it, or -1 when that
  /// derivative mixes more than the order allows.
  void split_plan(const JetLayout& a, const JetLayout& b, std::vector<int>& from_a, std::vector<int>& from_b) const;

  bool operator==(const JetLayout& o) const { return order_ == o.order_ && support_ == o.support_; }

 private:
  std::vector<int> support_;
  int order_ = 2;
  int size_ = 1;
  std::vector<Term> terms_;
};

std::vector<int> support_union(const std::vector<int>& a, const std::vector<int>& b);
bool supports_disjoint(const std::vector<int>& a, const std::vector<int>& b);

/// Operations on bi-jets: m x m row-major buffers where the row index is the
/// slot on the first argument side and the column index the slot on the second.
namespace bijet {

/// c = a * b (all three share `layout`). `c` must not alias the inputs.
void multiply(const JetLayout& layout, const double* a, const double* b, double* c);

/// c = a * b for factors with disjoint supports, using a precomputed split plan.
void multiply_disjoint(int m, const int* from_a, int ma, const int* from_b, int mb, const double* a,
                       const double* b, double* c);

/// dst += src embedded through `embed` (slot map from the smaller layout).
void add_embedded(int m_dst, const int* embed, int m_src, const double* src, double* dst);

/// out = exp(a). `scratch` needs 4 * m doubles.
void exp(const JetLayout& layout, const double* a, double* out, double* scratch);

/// out = a^p for p >= 1. `scratch` needs m * m doubles.
void pow(const JetLayout& layout, const double* a, int p, double* out, double* scratch);

}  // namespace bijet

}  // namespace lipgp::kernel
