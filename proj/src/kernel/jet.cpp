#include "lipgp/kernel/jet.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <stdexcept>

namespace lipgp::kernel {

JetLayout::JetLayout(std::vector<int> support, int order) : support_(std::move(support)), order_(order) {
  if (order < 0 || order > 2) throw std::invalid_argument("jet order must be 0, 1 or 2");
  if (!std::is_sorted(support_.begin(), support_.end()) ||
      std::adjacent_find(support_.begin(), support_.end()) != support_.end()) {
    throw std::invalid_argument("jet support must be sorted and unique");
  }
  const int s = num_vars();
  size_ = 1 + (order >= 1 ? s : 0) + (order >= 2 ? s * (s + 1) / 2 : 0);

  terms_.push_back({0, 0, 0, 1.0});
  if (order >= 1) {
    for (int a = 0; a < s; ++a) {
      terms_.push_back({grad_slot(a), grad_slot(a), 0, 1.0});
      terms_.push_back({grad_slot(a), 0, grad_slot(a), 1.0});
    }
  }
  if (order >= 2) {
    for (int a = 0; a < s; ++a) {
      for (int b = a; b < s; ++b) {
        const int h = hess_slot(a, b);
        terms_.push_back({h, h, 0, 1.0});
        terms_.push_back({h, 0, h, 1.0});
        if (a == b) {
          terms_.push_back({h, grad_slot(a), grad_slot(a), 2.0});
        } else {
          terms_.push_back({h, grad_slot(a), grad_slot(b), 1.0});
          terms_.push_back({h, grad_slot(b), grad_slot(a), 1.0});
        }
      }
    }
  }
}

int JetLayout::local(int var) const {
  const auto it = std::lower_bound(support_.begin(), support_.end(), var);
  if (it == support_.end() || *it != var) return -1;
  return static_cast<int>(it - support_.begin());
}

int JetLayout::hess_slot(int la, int lb) const {
  if (la > lb) std::swap(la, lb);
  const int s = num_vars();
  return 1 + s + la * (2 * s - la + 1) / 2 + (lb - la);
}

int JetLayout::slot_of(std::span<const int> vars) const {
  if (static_cast<int>(vars.size()) > order_) return -1;
  if (vars.empty()) return 0;
  const int a = local(vars[0]);
  if (a < 0) return -1;
  if (vars.size() == 1) return grad_slot(a);
  const int b = local(vars[1]);
  if (b < 0) return -1;
  return hess_slot(a, b);
}

std::vector<int> JetLayout::embedding_of(const JetLayout& sub) const {
  if (sub.order_ != order_) throw std::invalid_argument("embedding between layouts of different order");
  std::vector<int> map(static_cast<std::size_t>(sub.size()), -1);
  map[0] = 0;
  const int s = sub.num_vars();
  std::vector<int> loc(static_cast<std::size_t>(s));
  for (int a = 0; a < s; ++a) {
    loc[static_cast<std::size_t>(a)] = local(sub.support_[static_cast<std::size_t>(a)]);
    if (loc[static_cast<std::size_t>(a)] < 0) throw std::invalid_argument("sub-layout support not contained");
  }
  if (order_ >= 1) {
    for (int a = 0; a < s; ++a) map[static_cast<std::size_t>(sub.grad_slot(a))] = grad_slot(loc[static_cast<std::size_t>(a)]);
  }
  if (order_ >= 2) {
    for (int a = 0; a < s; ++a) {
      for (int b = a; b < s; ++b) {
        map[static_cast<std::size_t>(sub.hess_slot(a, b))] =
            hess_slot(loc[static_cast<std::size_t>(a)], loc[static_cast<std::size_t>(b)]);
      }
    }
  }
  return map;
}

void JetLayout::split_plan(const JetLayout& a, const JetLayout& b, std::vector<int>& from_a,
                           std::vector<int>& from_b) const {
  from_a.assign(static_cast<std::size_t>(size_), -1);
  from_b.assign(static_cast<std::size_t>(size_), -1);
  from_a[0] = from_b[0] = 0;
  const int s = num_vars();
  auto side = [&](int l, int& la, int& lb) {
    const int var = support_[static_cast<std::size_t>(l)];
    la = a.local(var);
    lb = b.local(var);
    if ((la < 0) == (lb < 0)) throw std::invalid_argument("split plan needs a disjoint cover of the support");
  };
  if (order_ >= 1) {
    for (int l = 0; l < s; ++l) {
      int la, lb;
      side(l, la, lb);
      const auto g = static_cast<std::size_t>(grad_slot(l));
      if (la >= 0) {
        from_a[g] = a.grad_slot(la);
        from_b[g] = 0;
      } else {
        from_a[g] = 0;
        from_b[g] = b.grad_slot(lb);
      }
    }
  }
  if (order_ >= 2) {
    for (int l = 0; l < s; ++l) {
      for (int k = l; k < s; ++k) {
        int la, lb, ka, kb;
        side(l, la, lb);
        side(k, ka, kb);
        const auto h = static_cast<std::size_t>(hess_slot(l, k));
        if (la >= 0 && ka >= 0) {
          from_a[h] = a.hess_slot(la, ka);
          from_b[h] = 0;
        } else if (lb >= 0 && kb >= 0) {
          from_a[h] = 0;
          from_b[h] = b.hess_slot(lb, kb);
        } else if (la >= 0) {
          from_a[h] = a.grad_slot(la);
          from_b[h] = b.grad_slot(kb);
        } else {
          from_a[h] = a.grad_slot(ka);
          from_b[h] = b.grad_slot(lb);
        }
      }
    }
  }
}

std::vector<int> support_union(const std::vector<int>& a, const std::vector<int>& b) {
  std::vector<int> out;
  std::set_union(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

bool supports_disjoint(const std::vector<int>& a, const std::vector<int>& b) {
  std::vector<int> out;
  std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out.empty();
}

namespace bijet {

namespace {

// y (+)= w * (a * b) for one-sided jets
inline void row_product_acc(const std::vector<JetLayout::Term>& terms, double w, const double* a, const double* b,
                            double* y) {
  for (const auto& t : terms) y[t.out] += w * t.weight * a[t.lhs] * b[t.rhs];
}

void row_exp(const JetLayout& layout, const double* a, double* e) {
  const int s = layout.order() >= 1 ? layout.num_vars() : 0;
  e[0] = std::exp(a[0]);
  for (int i = 0; i < s; ++i) e[layout.grad_slot(i)] = e[0] * a[layout.grad_slot(i)];
  if (layout.order() >= 2) {
    for (int i = 0; i < s; ++i) {
      for (int j = i; j < s; ++j) {
        const int h = layout.hess_slot(i, j);
        e[h] = e[0] * (a[h] + a[layout.grad_slot(i)] * a[layout.grad_slot(j)]);
      }
    }
  }
}

}  // namespace

void multiply(const JetLayout& layout, const double* a, const double* b, double* c) {
  const int m = layout.size();
  const auto& terms = layout.terms();
  std::memset(c, 0, sizeof(double) * static_cast<std::size_t>(m) * static_cast<std::size_t>(m));
  for (const auto& t : terms) {
    row_product_acc(terms, t.weight, a + t.lhs * m, b + t.rhs * m, c + t.out * m);
  }
}

void multiply_disjoint(int m, const int* from_a, int ma, const int* from_b, int mb, const double* a,
                       const double* b, double* c) {
  for (int o = 0; o < m; ++o) {
    const double* ar = a + from_a[o] * ma;
    const double* br = b + from_b[o] * mb;
    double* cr = c + o * m;
    for (int i = 0; i < m; ++i) cr[i] = ar[from_a[i]] * br[from_b[i]];
  }
}

void add_embedded(int m_dst, const int* embed, int m_src, const double* src, double* dst) {
  for (int o = 0; o < m_src; ++o) {
    double* dr = dst + embed[o] * m_dst;
    const double* sr = src + o * m_src;
    for (int i = 0; i < m_src; ++i) dr[embed[i]] += sr[i];
  }
}

void exp(const JetLayout& layout, const double* a, double* out, double* scratch) {
  const int m = layout.size();
  const auto& terms = layout.terms();
  const std::size_t row_bytes = sizeof(double) * static_cast<std::size_t>(m);
  double* e0 = out;
  row_exp(layout, a, e0);
  if (layout.order() == 0) return;
  double* tmp = scratch;
  const int s = layout.num_vars();
  for (int i = 0; i < s; ++i) {
    const int g = layout.grad_slot(i);
    std::memset(out + g * m, 0, row_bytes);
    row_product_acc(terms, 1.0, e0, a + g * m, out + g * m);
  }
  if (layout.order() < 2) return;
  for (int i = 0; i < s; ++i) {
    for (int j = i; j < s; ++j) {
      const int h = layout.hess_slot(i, j);
      std::memcpy(tmp, a + h * m, row_bytes);
      row_product_acc(terms, 1.0, a + layout.grad_slot(i) * m, a + layout.grad_slot(j) * m, tmp);
      std::memset(out + h * m, 0, row_bytes);
      row_product_acc(terms, 1.0, e0, tmp, out + h * m);
    }
  }
}

void pow(const JetLayout& layout, const double* a, int p, double* out, double* scratch) {
  if (p < 1) throw std::invalid_argument("bijet power must be >= 1");
  const std::size_t n = static_cast<std::size_t>(layout.size()) * static_cast<std::size_t>(layout.size());
  std::memcpy(out, a, sizeof(double) * n);
  for (int k = 2; k <= p; ++k) {
    std::memcpy(scratch, out, sizeof(double) * n);
    multiply(layout, scratch, a, out);
  }
}

}  // namespace bijet

}  // namespace lipgp::kernel
