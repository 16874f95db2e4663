#include "lipgp/lip/operator_kernel.hpp"

namespace lipgp::lip {

OperatorKernel::OperatorKernel(std::vector<robot::JointKind> kinds, std::vector<LagrangianComponent> comps)
    : kinds_(std::move(kinds)), coords_(kinds_), comps_(std::move(comps)) {
  if (comps_.empty()) throw std::invalid_argument("operator kernel needs at least one Lagrangian component");
  const int n = coords_.dof;
  for (const auto& c : comps_) {
    auto prog = std::make_shared<const kernel::DerivativeProgram>(c.expr, coords_.map, 2);
    const auto& lay = prog->layout(prog->root());
    Slots s;
    s.qdqd.assign(static_cast<std::size_t>(n), std::vector<int>(static_cast<std::size_t>(n), -1));
    s.qdq = s.qdqd;
    s.q.assign(static_cast<std::size_t>(n), -1);
    for (int i = 0; i < n; ++i) {
      for (int l = 0; l < n; ++l) {
        const int vv[2] = {coords_.var_qd(i), coords_.var_qd(l)};
        const int vq[2] = {coords_.var_qd(i), coords_.var_q(l)};
        s.qdqd[static_cast<std::size_t>(i)][static_cast<std::size_t>(l)] = lay.slot_of(vv);
        s.qdq[static_cast<std::size_t>(i)][static_cast<std::size_t>(l)] = lay.slot_of(vq);
      }
      const int vi[1] = {coords_.var_q(i)};
      s.q[static_cast<std::size_t>(i)] = lay.slot_of(vi);
    }
    programs_.push_back(std::move(prog));
    slots_.push_back(std::move(s));
  }
}

bool OperatorKernel::has_energy_split() const {
  bool kin = false, pot = false;
  for (const auto& c : comps_) {
    kin |= c.part == EnergyPart::Kinetic;
    pot |= c.part == EnergyPart::Potential;
    if (c.part == EnergyPart::Lagrangian) return false;
  }
  return kin && pot;
}

int OperatorKernel::num_params() const {
  int p = 0;
  for (const auto& c : comps_) p += c.expr.num_params();
  return p;
}

Vec OperatorKernel::log_params() const {
  Vec out(num_params());
  long pos = 0;
  for (const auto& c : comps_) {
    const Vec p = c.expr.log_params();
    out.segment(pos, p.size()) = p;
    pos += p.size();
  }
  return out;
}

OperatorKernel OperatorKernel::with_log_params(const Vec& theta) const {
  require_dim(theta.size(), num_params(), "operator kernel hyperparameters");
  auto comps = comps_;
  long pos = 0;
  for (auto& c : comps) {
    const long k = c.expr.num_params();
    c.expr = c.expr.with_log_params(theta.segment(pos, k));
    pos += k;
  }
  return OperatorKernel(kinds_, std::move(comps));
}

int OperatorKernel::component_of_param(int p) const {
  int pos = 0;
  for (int c = 0; c < num_components(); ++c) {
    pos += comps_[static_cast<std::size_t>(c)].expr.num_params();
    if (p < pos) return c;
  }
  throw std::out_of_range("operator kernel: parameter index out of range");
}

std::vector<std::string> OperatorKernel::param_names() const {
  std::vector<std::string> out;
  for (const auto& c : comps_) {
    const auto names = c.expr.param_names();
    out.insert(out.end(), names.begin(), names.end());
  }
  return out;
}

OperatorKernel::Side OperatorKernel::prepare(const robot::JointState& s) const {
  require_dim(s.q.size(), dof(), "q");
  require_dim(s.qd.size(), dof(), "qd");
  require_dim(s.qdd.size(), dof(), "qdd");
  const Vec raw = LagrangianCoordinates::raw(s);
  return Side{programs_.front()->prepare(as_span(raw)), s.qd, s.qdd};
}

OperatorKernel::Workspace OperatorKernel::make_workspace() const {
  Workspace ws;
  for (const auto& p : programs_) ws.ws_.push_back(p->make_workspace());
  return ws;
}

void OperatorKernel::operator_rows(const Slots& s, const Side& side, std::vector<std::vector<Entry>>& rows) const {
  const auto n = static_cast<std::size_t>(dof());
  rows.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    auto& r = rows[i];
    r.clear();
    for (std::size_t l = 0; l < n; ++l) {
      if (s.qdqd[i][l] >= 0 && side.qdd(static_cast<long>(l)) != 0.0) {
        r.push_back({s.qdqd[i][l], side.qdd(static_cast<long>(l))});
      }
      if (s.qdq[i][l] >= 0 && side.qd(static_cast<long>(l)) != 0.0) {
        r.push_back({s.qdq[i][l], side.qd(static_cast<long>(l))});
      }
    }
    if (s.q[i] >= 0) r.push_back({s.q[i], -1.0});
  }
}

void OperatorKernel::add_block(int c, const Side& x, const Side& xp, Eigen::Ref<Mat> out, Workspace& ws) const {
  const int n = dof();
  if (out.rows() != n || out.cols() != n) throw DimensionError("operator block: output must be n x n");
  if (ws.ws_.size() != programs_.size()) ws = make_workspace();
  thread_local std::vector<std::vector<Entry>> gx, gy;
  const int first = c < 0 ? 0 : c;
  const int last = c < 0 ? num_components() : c + 1;
  for (int k = first; k < last; ++k) {
    const auto& prog = *programs_[static_cast<std::size_t>(k)];
    const double* r = prog.evaluate(x.data, xp.data, ws.ws_[static_cast<std::size_t>(k)]);
    const int m = prog.layout(prog.root()).size();
    operator_rows(slots_[static_cast<std::size_t>(k)], x, gx);
    operator_rows(slots_[static_cast<std::size_t>(k)], xp, gy);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        double acc = 0.0;
        for (const auto& a : gx[static_cast<std::size_t>(i)]) {
          const double* row = r + a.slot * m;
          double inner = 0.0;
          for (const auto& b : gy[static_cast<std::size_t>(j)]) inner += b.coeff * row[b.slot];
          acc += a.coeff * inner;
        }
        out(i, j) += acc;
      }
    }
  }
}

Mat OperatorKernel::torque_kernel_block(const robot::JointState& x, const robot::JointState& xp) const {
  auto ws = make_workspace();
  Mat out = Mat::Zero(dof(), dof());
  add_block(-1, prepare(x), prepare(xp), out, ws);
  return out;
}

void OperatorKernel::add_energy_row(EnergyPart which, const Side& x, const Side& xp, Eigen::Ref<Vec> out,
                                    Workspace& ws) const {
  if (which == EnergyPart::Lagrangian || !has_energy_split()) {
    throw UnsupportedOperation("energy cross-covariance needs a kernel split into kinetic and potential parts");
  }
  require_dim(out.size(), dof(), "energy row");
  if (ws.ws_.size() != programs_.size()) ws = make_workspace();
  thread_local std::vector<std::vector<Entry>> gy;
  const double sign = which == EnergyPart::Potential ? -1.0 : 1.0;
  for (int k = 0; k < num_components(); ++k) {
    if (comps_[static_cast<std::size_t>(k)].part != which) continue;
    const auto& prog = *programs_[static_cast<std::size_t>(k)];
    const double* r = prog.evaluate(x.data, xp.data, ws.ws_[static_cast<std::size_t>(k)]);
    operator_rows(slots_[static_cast<std::size_t>(k)], xp, gy);
    for (int j = 0; j < dof(); ++j) {
      double acc = 0.0;
      for (const auto& b : gy[static_cast<std::size_t>(j)]) acc += b.coeff * r[b.slot];
      out(j) += sign * acc;
    }
  }
}

Vec OperatorKernel::energy_cross_row(EnergyPart which, const robot::JointState& x,
                                     const robot::JointState& xp) const {
  auto ws = make_workspace();
  Vec out = Vec::Zero(dof());
  add_energy_row(which, prepare(x), prepare(xp), out, ws);
  return out;
}

double OperatorKernel::energy_prior(EnergyPart which, const Side& x, Workspace& ws) const {
  if (which == EnergyPart::Lagrangian || !has_energy_split()) {
    throw UnsupportedOperation("energy prior needs a kernel split into kinetic and potential parts");
  }
  if (ws.ws_.size() != programs_.size()) ws = make_workspace();
  double acc = 0.0;
  for (int k = 0; k < num_components(); ++k) {
    if (comps_[static_cast<std::size_t>(k)].part != which) continue;
    acc += programs_[static_cast<std::size_t>(k)]->evaluate(x.data, x.data, ws.ws_[static_cast<std::size_t>(k)])[0];
  }
  return acc;
}

}  // namespace lipgp::lip
