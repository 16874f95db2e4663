#pragma once

#include <cstddef>
#include <span>

namespace lipgp::simd {

enum class Isa { Scalar, Avx2 };

/// Instruction set used by the dispatched entry points below. Chosen once at
/// startup from CPUID; `force_isa` overrides it (tests, benchmarks).
Isa active_isa();
bool isa_available(Isa isa);
void force_isa(Isa isa);
const char* isa_name(Isa isa);

double dot(std::span<const double> a, std::span<const double> b);

/// y += alpha * x
void axpy(double alpha, std::span<const double> x, std::span<double> y);

/// out[j] = sum_k w[k] * (x[k] - cols[k * stride + j])^2 for j < out.size().
/// `cols` stores one coordinate per row (structure-of-arrays).
void weighted_sq_dists(std::span<const double> x, const double* cols, std::size_t stride,
                       std::span<const double> w, std::span<double> out);

/// Scalar reference kernels and the AVX2 variants, exposed for equivalence tests.
namespace scalar {
double dot(const double* a, const double* b, std::size_t n);
void axpy(double alpha, const double* x, double* y, std::size_t n);
void weighted_sq_dists(const double* x, std::size_t dim, const double* cols, std::size_t stride, const double* w,
                       double* out, std::size_t count);
}  // namespace scalar

namespace avx2 {
double dot(const double* a, const double* b, std::size_t n);
void axpy(double alpha, const double* x, double* y, std::size_t n);
void weighted_sq_dists(const double* x, std::size_t dim, const double* cols, std::size_t stride, const double* w,
                       double* out, std::size_t count);
}  // namespace avx2

}  // namespace lipgp::simd
