#include "lipgp/kernel/expr.hpp"

#include <algorithm>
#include <cmath>

namespace lipgp::kernel {

KernelAtom KernelAtom::squared_exponential(std::vector<int> selector, double log_scale, double log_lengthscale) {
  KernelAtom a;
  a.kind = AtomKind::SquaredExponential;
  a.log_weights = Vec::Constant(static_cast<long>(selector.size()), log_lengthscale);
  a.selector = std::move(selector);
  a.log_scale = log_scale;
  return a;
}

KernelAtom KernelAtom::inhomogeneous_poly(std::vector<int> selector, int degree) {
  KernelAtom a;
  a.kind = AtomKind::InhomogeneousPoly;
  a.degree = degree;
  a.log_weights = Vec::Zero(static_cast<long>(selector.size()));
  a.selector = std::move(selector);
  return a;
}

KernelAtom KernelAtom::homogeneous_poly(std::vector<int> selector, int degree) {
  auto a = inhomogeneous_poly(std::move(selector), degree);
  a.kind = AtomKind::HomogeneousPoly;
  return a;
}

int KernelAtom::num_params() const {
  const int k = static_cast<int>(selector.size());
  switch (kind) {
    case AtomKind::SquaredExponential:
    case AtomKind::InhomogeneousPoly:
      return k + 1;
    case AtomKind::HomogeneousPoly:
      return k;
  }
  return k;
}

void KernelAtom::validate() const {
  if (selector.empty()) throw std::invalid_argument("kernel atom: empty input selector");
  if (log_weights.size() != static_cast<long>(selector.size())) {
    throw DimensionError("kernel atom: one weight per selected coordinate required");
  }
  if (std::any_of(selector.begin(), selector.end(), [](int i) { return i < 0; })) {
    throw std::invalid_argument("kernel atom: negative coordinate index");
  }
  if (kind != AtomKind::SquaredExponential && degree < 1) {
    throw std::invalid_argument("kernel atom: polynomial degree must be >= 1");
  }
  if (!log_weights.allFinite() || !std::isfinite(log_scale) || !std::isfinite(log_offset)) {
    throw std::invalid_argument("kernel atom: non-finite hyperparameter");
  }
}

double KernelAtom::value(std::span<const double> x, std::span<const double> xp) const {
  double acc = 0.0;
  const auto k = selector.size();
  if (kind == AtomKind::SquaredExponential) {
    for (std::size_t i = 0; i < k; ++i) {
      const auto c = static_cast<std::size_t>(selector[i]);
      const double d = x[c] - xp[c];
      acc += d * d * std::exp(-log_weights(static_cast<long>(i)));
    }
    return std::exp(log_scale - acc);
  }
  for (std::size_t i = 0; i < k; ++i) {
    const auto c = static_cast<std::size_t>(selector[i]);
    acc += std::exp(log_weights(static_cast<long>(i))) * x[c] * xp[c];
  }
  if (kind == AtomKind::InhomogeneousPoly) acc += std::exp(log_offset);
  double out = acc;
  for (int p = 1; p < degree; ++p) out *= acc;
  return out;
}

KernelExpr KernelExpr::atom(KernelAtom a, std::string tag) {
  a.validate();
  KernelExpr e;
  e.op_ = Op::Atom;
  e.atom_ = std::move(a);
  e.tag_ = std::move(tag);
  return e;
}

KernelExpr KernelExpr::sum(std::vector<KernelExpr> children, std::string tag) {
  if (children.empty()) throw std::invalid_argument("kernel sum needs at least one term");
  KernelExpr e;
  e.op_ = Op::Sum;
  e.children_ = std::move(children);
  e.tag_ = std::move(tag);
  return e;
}

KernelExpr KernelExpr::product(std::vector<KernelExpr> children, std::string tag) {
  if (children.empty()) throw std::invalid_argument("kernel product needs at least one factor");
  KernelExpr e;
  e.op_ = Op::Product;
  e.children_ = std::move(children);
  e.tag_ = std::move(tag);
  return e;
}

int KernelExpr::input_dim() const {
  if (op_ == Op::Atom) return *std::max_element(atom_.selector.begin(), atom_.selector.end()) + 1;
  int d = 0;
  for (const auto& c : children_) d = std::max(d, c.input_dim());
  return d;
}

int KernelExpr::num_params() const {
  if (op_ == Op::Atom) return atom_.num_params();
  int n = 0;
  for (const auto& c : children_) n += c.num_params();
  return n;
}

Vec KernelExpr::log_params() const {
  Vec out(num_params());
  if (op_ == Op::Atom) {
    const long k = atom_.log_weights.size();
    switch (atom_.kind) {
      case AtomKind::SquaredExponential:
        out(0) = atom_.log_scale;
        out.tail(k) = atom_.log_weights;
        break;
      case AtomKind::InhomogeneousPoly:
        out.head(k) = atom_.log_weights;
        out(k) = atom_.log_offset;
        break;
      case AtomKind::HomogeneousPoly:
        out = atom_.log_weights;
        break;
    }
    return out;
  }
  long pos = 0;
  for (const auto& c : children_) {
    const Vec p = c.log_params();
    out.segment(pos, p.size()) = p;
    pos += p.size();
  }
  return out;
}

void KernelExpr::assign_params(const Vec& theta, int& pos) {
  if (op_ == Op::Atom) {
    const long k = atom_.log_weights.size();
    switch (atom_.kind) {
      case AtomKind::SquaredExponential:
        atom_.log_scale = theta(pos);
        atom_.log_weights = theta.segment(pos + 1, k);
        break;
      case AtomKind::InhomogeneousPoly:
        atom_.log_weights = theta.segment(pos, k);
        atom_.log_offset = theta(pos + k);
        break;
      case AtomKind::HomogeneousPoly:
        atom_.log_weights = theta.segment(pos, k);
        break;
    }
    pos += atom_.num_params();
    return;
  }
  for (auto& c : children_) c.assign_params(theta, pos);
}

KernelExpr KernelExpr::with_log_params(const Vec& theta) const {
  require_dim(theta.size(), num_params(), "kernel hyperparameters");
  if (!theta.allFinite()) throw std::invalid_argument("kernel hyperparameters must be finite");
  KernelExpr out = *this;
  int pos = 0;
  out.assign_params(theta, pos);
  return out;
}

std::vector<std::string> KernelExpr::param_names(const std::string& prefix) const {
  std::vector<std::string> names;
  const std::string base = tag_.empty() ? prefix : (prefix.empty() ? tag_ : prefix + "." + tag_);
  if (op_ == Op::Atom) {
    auto coord = [&](std::size_t i) { return std::to_string(atom_.selector[i]); };
    if (atom_.kind == AtomKind::SquaredExponential) names.push_back(base + ".log_lambda");
    for (std::size_t i = 0; i < atom_.selector.size(); ++i) {
      names.push_back(base + (atom_.kind == AtomKind::SquaredExponential ? ".log_sigma" : ".log_s") + coord(i));
    }
    if (atom_.kind == AtomKind::InhomogeneousPoly) names.push_back(base + ".log_offset");
    return names;
  }
  for (std::size_t i = 0; i < children_.size(); ++i) {
    const auto sub = children_[i].param_names(base + "[" + std::to_string(i) + "]");
    names.insert(names.end(), sub.begin(), sub.end());
  }
  return names;
}

double KernelExpr::value(std::span<const double> x, std::span<const double> xp) const {
  switch (op_) {
    case Op::Atom:
      return atom_.value(x, xp);
    case Op::Sum: {
      double acc = 0.0;
      for (const auto& c : children_) acc += c.value(x, xp);
      return acc;
    }
    case Op::Product: {
      double acc = 1.0;
      for (const auto& c : children_) acc *= c.value(x, xp);
      return acc;
    }
  }
  return 0.0;
}

const KernelExpr* KernelExpr::find(const std::string& tag) const {
  if (tag_ == tag) return this;
  for (const auto& c : children_) {
    if (const auto* f = c.find(tag)) return f;
  }
  return nullptr;
}

}  // namespace lipgp::kernel
