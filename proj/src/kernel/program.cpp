#include "lipgp/kernel/program.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>

namespace lipgp::kernel {

InputMap InputMap::identity(int dim) {
  InputMap m;
  m.num_vars = dim;
  for (int i = 0; i < dim; ++i) m.coords.push_back({i, CoordMap::Identity});
  return m;
}

void InputMap::validate() const {
  for (const auto& c : coords) {
    if (c.var < 0 || c.var >= num_vars) throw std::invalid_argument("input map: variable index out of range");
  }
}

std::size_t DerivativeProgram::reserve(std::size_t count) {
  const std::size_t at = workspace_size_;
  workspace_size_ += count;
  return at;
}

DerivativeProgram::DerivativeProgram(const KernelExpr& expr, InputMap map, int order)
    : map_(std::move(map)), order_(order) {
  map_.validate();
  if (order < 0 || order > 2) throw std::invalid_argument("derivative program order must be 0, 1 or 2");
  root_ = compile(expr);
}

int DerivativeProgram::compile(const KernelExpr& e) {
  Node node;
  node.op = e.op();
  node.tag = e.tag();

  if (e.op() == KernelExpr::Op::Atom) {
    const auto& a = e.atom_data();
    std::vector<int> vars;
    for (int c : a.selector) {
      if (c >= static_cast<int>(map_.coords.size())) {
        throw DimensionError("kernel atom selects coordinate " + std::to_string(c) + " beyond the input map");
      }
      vars.push_back(map_.coords[static_cast<std::size_t>(c)].var);
    }
    std::sort(vars.begin(), vars.end());
    vars.erase(std::unique(vars.begin(), vars.end()), vars.end());
    node.layout = JetLayout(vars, order_);
    node.kind = a.kind;
    node.degree = a.degree;
    node.coords = a.selector;
    for (std::size_t k = 0; k < a.selector.size(); ++k) {
      node.coord_local.push_back(node.layout.local(map_.coords[static_cast<std::size_t>(a.selector[k])].var));
      const double lw = a.log_weights(static_cast<long>(k));
      node.weights.push_back(a.kind == AtomKind::SquaredExponential ? std::exp(-lw) : std::exp(lw));
    }
    node.log_scale = a.log_scale;
    node.offset = a.kind == AtomKind::InhomogeneousPoly ? std::exp(a.log_offset) : 0.0;
    const auto m = static_cast<std::size_t>(node.layout.size());
    node.out = reserve(m * m);
    node.scratch = reserve(2 * m * m);
    nodes_.push_back(std::move(node));
    return static_cast<int>(nodes_.size()) - 1;
  }

  for (const auto& c : e.children()) node.children.push_back(compile(c));
  auto child_layout = [&](int c) -> const JetLayout& { return nodes_[static_cast<std::size_t>(c)].layout; };

  if (e.op() == KernelExpr::Op::Sum) {
    std::vector<int> support;
    for (int c : node.children) support = support_union(support, child_layout(c).support());
    node.layout = JetLayout(support, order_);
    for (int c : node.children) node.embeds.push_back(node.layout.embedding_of(child_layout(c)));
    const auto m = static_cast<std::size_t>(node.layout.size());
    node.out = reserve(m * m);
  } else {
    JetLayout acc = child_layout(node.children[0]);
    for (std::size_t k = 1; k < node.children.size(); ++k) {
      Step s;
      s.child = node.children[k];
      const auto& arg = child_layout(s.child);
      s.layout = JetLayout(support_union(acc.support(), arg.support()), order_);
      s.disjoint = supports_disjoint(acc.support(), arg.support());
      const auto m = static_cast<std::size_t>(s.layout.size());
      if (s.disjoint) {
        s.layout.split_plan(acc, arg, s.from_a, s.from_b);
      } else {
        s.embed_acc = s.layout.embedding_of(acc);
        s.embed_arg = s.layout.embedding_of(arg);
        s.tmp_a = reserve(m * m);
        s.tmp_b = reserve(m * m);
      }
      s.out = reserve(m * m);
      acc = s.layout;
      node.steps.push_back(std::move(s));
    }
    node.layout = acc;
    if (node.steps.empty()) {
      const auto m = static_cast<std::size_t>(node.layout.size());
      node.out = reserve(m * m);
    } else {
      node.out = node.steps.back().out;
    }
  }
  nodes_.push_back(std::move(node));
  return static_cast<int>(nodes_.size()) - 1;
}

int DerivativeProgram::find_tag(const std::string& tag) const {
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    if (nodes_[i].tag == tag) return static_cast<int>(i);
  }
  return -1;
}

DerivativeProgram::Workspace DerivativeProgram::make_workspace() const {
  Workspace ws;
  ws.buf_.assign(workspace_size_, 0.0);
  return ws;
}

SideData DerivativeProgram::prepare(std::span<const double> vars) const {
  require_dim(static_cast<long>(vars.size()), map_.num_vars, "kernel input");
  SideData s;
  s.vars.assign(vars.begin(), vars.end());
  s.c.resize(3 * map_.coords.size());
  for (std::size_t k = 0; k < map_.coords.size(); ++k) {
    const double v = vars[static_cast<std::size_t>(map_.coords[k].var)];
    double* out = &s.c[3 * k];
    switch (map_.coords[k].map) {
      case CoordMap::Identity:
        out[0] = v;
        out[1] = 1.0;
        out[2] = 0.0;
        break;
      case CoordMap::Cos: {
        const double cv = std::cos(v), sv = std::sin(v);
        out[0] = cv;
        out[1] = -sv;
        out[2] = -cv;
        break;
      }
      case CoordMap::Sin: {
        const double cv = std::cos(v), sv = std::sin(v);
        out[0] = sv;
        out[1] = cv;
        out[2] = -sv;
        break;
      }
    }
  }
  return s;
}

namespace {

// Nonzero slots of a coordinate jet that depends on a single variable.
struct SparseJet {
  int n = 0;
  int slot[3];
  double v[3];
};

inline SparseJet coord_jet(const JetLayout& layout, int local, const double* c) {
  SparseJet j;
  j.slot[j.n] = 0;
  j.v[j.n++] = c[0];
  if (layout.order() >= 1 && c[1] != 0.0) {
    j.slot[j.n] = layout.grad_slot(local);
    j.v[j.n++] = c[1];
  }
  if (layout.order() >= 2 && c[2] != 0.0) {
    j.slot[j.n] = layout.hess_slot(local, local);
    j.v[j.n++] = c[2];
  }
  return j;
}

inline SparseJet square_jet(const JetLayout& layout, int local, const double* c) {
  SparseJet j;
  j.slot[j.n] = 0;
  j.v[j.n++] = c[0] * c[0];
  if (layout.order() >= 1) {
    j.slot[j.n] = layout.grad_slot(local);
    j.v[j.n++] = 2.0 * c[0] * c[1];
  }
  if (layout.order() >= 2) {
    j.slot[j.n] = layout.hess_slot(local, local);
    j.v[j.n++] = 2.0 * (c[1] * c[1] + c[0] * c[2]);
  }
  return j;
}

}  // namespace

void DerivativeProgram::eval_atom(const Node& node, const SideData& a, const SideData& b, double* ws) const {
  const int m = node.layout.size();
  const auto mm = static_cast<std::size_t>(m) * static_cast<std::size_t>(m);
  double* acc = ws + node.scratch;
  std::memset(acc, 0, sizeof(double) * mm);
  const std::size_t k_count = node.coords.size();

  if (node.kind == AtomKind::SquaredExponential) {
    double dist = 0.0;
    for (std::size_t k = 0; k < k_count; ++k) {
      const double w = node.weights[k];
      const auto c = 3 * static_cast<std::size_t>(node.coords[k]);
      const int l = node.coord_local[k];
      const auto xa = coord_jet(node.layout, l, &a.c[c]);
      const auto xb = coord_jet(node.layout, l, &b.c[c]);
      const auto sa = square_jet(node.layout, l, &a.c[c]);
      const auto sb = square_jet(node.layout, l, &b.c[c]);
      // A = log(lambda) - D, D = sum w (x^2 (x) 1 + 1 (x) x'^2 - 2 x (x) x')
      for (int p = 0; p < sa.n; ++p) acc[sa.slot[p] * m] -= w * sa.v[p];
      for (int q = 0; q < sb.n; ++q) acc[sb.slot[q]] -= w * sb.v[q];
      for (int p = 0; p < xa.n; ++p) {
        for (int q = 0; q < xb.n; ++q) acc[xa.slot[p] * m + xb.slot[q]] += 2.0 * w * xa.v[p] * xb.v[q];
      }
      const double d = a.c[c] - b.c[c];
      dist += w * d * d;
    }
    // the value slot is formed directly to avoid cancellation near x = x'
    acc[0] = node.log_scale - dist;
    bijet::exp(node.layout, acc, ws + node.out, ws + node.scratch + mm);
    return;
  }

  acc[0] = node.offset;
  for (std::size_t k = 0; k < k_count; ++k) {
    const double w = node.weights[k];
    const auto c = 3 * static_cast<std::size_t>(node.coords[k]);
    const int l = node.coord_local[k];
    const auto xa = coord_jet(node.layout, l, &a.c[c]);
    const auto xb = coord_jet(node.layout, l, &b.c[c]);
    for (int p = 0; p < xa.n; ++p) {
      for (int q = 0; q < xb.n; ++q) acc[xa.slot[p] * m + xb.slot[q]] += w * xa.v[p] * xb.v[q];
    }
  }
  bijet::pow(node.layout, acc, node.degree, ws + node.out, ws + node.scratch + mm);
}

void DerivativeProgram::eval_node(int index, const SideData& a, const SideData& b, double* ws) const {
  const Node& node = nodes_[static_cast<std::size_t>(index)];
  const int m = node.layout.size();
  const auto mm = static_cast<std::size_t>(m) * static_cast<std::size_t>(m);
  switch (node.op) {
    case KernelExpr::Op::Atom:
      eval_atom(node, a, b, ws);
      return;
    case KernelExpr::Op::Sum: {
      double* out = ws + node.out;
      std::memset(out, 0, sizeof(double) * mm);
      for (std::size_t k = 0; k < node.children.size(); ++k) {
        const Node& c = nodes_[static_cast<std::size_t>(node.children[k])];
        bijet::add_embedded(m, node.embeds[k].data(), c.layout.size(), ws + c.out, out);
      }
      return;
    }
    case KernelExpr::Op::Product: {
      const Node& first = nodes_[static_cast<std::size_t>(node.children[0])];
      if (node.steps.empty()) {
        std::memcpy(ws + node.out, ws + first.out, sizeof(double) * mm);
        return;
      }
      const double* acc = ws + first.out;
      int acc_m = first.layout.size();
      for (const auto& s : node.steps) {
        const Node& arg = nodes_[static_cast<std::size_t>(s.child)];
        const int sm = s.layout.size();
        const auto smm = static_cast<std::size_t>(sm) * static_cast<std::size_t>(sm);
        if (s.disjoint) {
          bijet::multiply_disjoint(sm, s.from_a.data(), acc_m, s.from_b.data(), arg.layout.size(), acc, ws + arg.out,
                                   ws + s.out);
        } else {
          double* ta = ws + s.tmp_a;
          double* tb = ws + s.tmp_b;
          std::memset(ta, 0, sizeof(double) * smm);
          std::memset(tb, 0, sizeof(double) * smm);
          bijet::add_embedded(sm, s.embed_acc.data(), acc_m, acc, ta);
          bijet::add_embedded(sm, s.embed_arg.data(), arg.layout.size(), ws + arg.out, tb);
          bijet::multiply(s.layout, ta, tb, ws + s.out);
        }
        acc = ws + s.out;
        acc_m = sm;
      }
      return;
    }
  }
}

const double* DerivativeProgram::evaluate(const SideData& a, const SideData& b, Workspace& ws) const {
  if (ws.buf_.size() != workspace_size_) ws.buf_.assign(workspace_size_, 0.0);
  if (a.c.size() != 3 * map_.coords.size() || b.c.size() != a.c.size()) {
    throw DimensionError("derivative program: side data does not match the input map");
  }
  double* buf = ws.buf_.data();
  for (std::size_t i = 0; i < nodes_.size(); ++i) eval_node(static_cast<int>(i), a, b, buf);
  return buf + nodes_[static_cast<std::size_t>(root_)].out;
}

const double* DerivativeProgram::result(int node, const Workspace& ws) const {
  return ws.buf_.data() + nodes_.at(static_cast<std::size_t>(node)).out;
}

namespace {

void check_inputs(const KernelExpr& k, std::span<const double> x, std::span<const double> xp) {
  if (x.size() != xp.size()) throw DimensionError("kernel arguments differ in length");
  if (static_cast<int>(x.size()) < k.input_dim()) {
    throw DimensionError("kernel expects at least " + std::to_string(k.input_dim()) + " coordinates, got " +
                         std::to_string(x.size()));
  }
}

}  // namespace

double eval(const KernelExpr& k, std::span<const double> x, std::span<const double> xp) {
  check_inputs(k, x, xp);
  return k.value(x, xp);
}

double mixed_partial(const KernelExpr& k, std::span<const double> x, std::span<const double> xp,
                     std::span<const int> alpha, std::span<const int> beta) {
  check_inputs(k, x, xp);
  if (alpha.size() > 2 || beta.size() > 2) {
    throw std::invalid_argument("mixed_partial: derivative order above 2 on one side is not supported");
  }
  const int dim = static_cast<int>(x.size());
  for (int i : alpha) {
    if (i < 0 || i >= dim) throw DimensionError("mixed_partial: derivative index out of range");
  }
  for (int i : beta) {
    if (i < 0 || i >= dim) throw DimensionError("mixed_partial: derivative index out of range");
  }
  const int order = static_cast<int>(std::max(alpha.size(), beta.size()));
  DerivativeProgram prog(k, InputMap::identity(dim), order);
  auto ws = prog.make_workspace();
  const double* r = prog.evaluate(prog.prepare(x), prog.prepare(xp), ws);
  const auto& layout = prog.layout(prog.root());
  const int sa = layout.slot_of(alpha), sb = layout.slot_of(beta);
  if (sa < 0 || sb < 0) return 0.0;  // variable outside the kernel's support
  return r[sa * layout.size() + sb];
}

Mat gram(const KernelExpr& k, const std::vector<Vec>& xs) {
  const auto n = static_cast<long>(xs.size());
  Mat g(n, n);
  for (long i = 0; i < n; ++i) {
    const auto a = as_span(xs[static_cast<std::size_t>(i)]);
    check_inputs(k, a, a);
    for (long j = 0; j <= i; ++j) g(i, j) = g(j, i) = k.value(a, as_span(xs[static_cast<std::size_t>(j)]));
  }
  return g;
}

}  // namespace lipgp::kernel
