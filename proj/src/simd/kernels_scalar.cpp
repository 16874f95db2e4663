#include "lipgp/simd/kernels.hpp"

namespace lipgp::simd::scalar {

double dot(const double* a, const double* b, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
  return s;
}

void axpy(double alpha, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

void weighted_sq_dists(const double* x, std::size_t dim, const double* cols, std::size_t stride, const double* w,
                       double* out, std::size_t count) {
  for (std::size_t j = 0; j < count; ++j) out[j] = 0.0;
  for (std::size_t k = 0; k < dim; ++k) {
    const double* row = cols + k * stride;
    for (std::size_t j = 0; j < count; ++j) {
      const double d = x[k] - row[j];
      out[j] += w[k] * d * d;
    }
  }
}

}  // namespace lipgp::simd::scalar
