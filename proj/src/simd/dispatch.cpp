#include "lipgp/simd/kernels.hpp"

#include <atomic>
#include <cassert>
#include <stdexcept>

namespace lipgp::simd {

namespace {

bool cpu_has_avx2() {
#if defined(__x86_64__) || defined(__i386__)
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

std::atomic<Isa>& current() {
  static std::atomic<Isa> isa{cpu_has_avx2() ? Isa::Avx2 : Isa::Scalar};
  return isa;
}

}  // namespace

Isa active_isa() { return current().load(std::memory_order_relaxed); }

bool isa_available(Isa isa) { return isa == Isa::Scalar || cpu_has_avx2(); }

void force_isa(Isa isa) {
  if (!isa_available(isa)) throw std::runtime_error(std::string("instruction set not available: ") + isa_name(isa));
  current().store(isa, std::memory_order_relaxed);
}

const char* isa_name(Isa isa) { return isa == Isa::Avx2 ? "avx2" : "scalar"; }

double dot(std::span<const double> a, std::span<const double> b) {
  assert(a.size() == b.size());
  return active_isa() == Isa::Avx2 ? avx2::dot(a.data(), b.data(), a.size())
                                   : scalar::dot(a.data(), b.data(), a.size());
}

void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  assert(x.size() == y.size());
  if (active_isa() == Isa::Avx2) {
    avx2::axpy(alpha, x.data(), y.data(), x.size());
  } else {
    scalar::axpy(alpha, x.data(), y.data(), x.size());
  }
}

void weighted_sq_dists(std::span<const double> x, const double* cols, std::size_t stride,
                       std::span<const double> w, std::span<double> out) {
  assert(x.size() == w.size());
  if (active_isa() == Isa::Avx2) {
    avx2::weighted_sq_dists(x.data(), x.size(), cols, stride, w.data(), out.data(), out.size());
  } else {
    scalar::weighted_sq_dists(x.data(), x.size(), cols, stride, w.data(), out.data(), out.size());
  }
}

}  // namespace lipgp::simd
