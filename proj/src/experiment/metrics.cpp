#include "lipgp/experiment/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace lipgp::experiment {

double nmse_percent(const Vec& pred, const Vec& truth) {
  require_dim(pred.size(), truth.size(), "nmse prediction length");
  if (truth.size() == 0) throw std::invalid_argument("nmse: empty input");
  const double energy = truth.squaredNorm();
  if (!(energy > 0.0)) throw std::invalid_argument("nmse: reference signal is identically zero");
  return 100.0 * (pred - truth).squaredNorm() / energy;
}

Vec nmse_percent(const Mat& pred, const Mat& truth) {
  require_dim(pred.rows(), truth.rows(), "nmse rows");
  require_dim(pred.cols(), truth.cols(), "nmse columns");
  Vec out(truth.cols());
  for (long j = 0; j < truth.cols(); ++j) out(j) = nmse_percent(Vec(pred.col(j)), Vec(truth.col(j)));
  return out;
}

double global_mse(const Mat& pred, const Mat& truth) {
  require_dim(pred.rows(), truth.rows(), "mse rows");
  require_dim(pred.cols(), truth.cols(), "mse columns");
  if (truth.rows() == 0) throw std::invalid_argument("mse: empty input");
  double acc = 0.0;
  for (long j = 0; j < truth.cols(); ++j) acc += (pred.col(j) - truth.col(j)).squaredNorm() / static_cast<double>(truth.rows());
  return acc;
}

double quantile(std::vector<double> values, double p) {
  if (values.empty()) return std::nan("");
  std::sort(values.begin(), values.end());
  const double pos = p * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, values.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return values[lo] + frac * (values[hi] - values[lo]);
}

Summary summarize(std::vector<double> values) {
  Summary s;
  s.count = static_cast<int>(values.size());
  if (values.empty()) {
    s.median = s.q1 = s.q3 = s.min = s.max = std::nan("");
    return s;
  }
  std::sort(values.begin(), values.end());
  s.min = values.front();
  s.max = values.back();
  s.median = quantile(values, 0.5);
  s.q1 = quantile(values, 0.25);
  s.q3 = quantile(values, 0.75);
  return s;
}

}  // namespace lipgp::experiment
