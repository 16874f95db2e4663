#pragma once

#include "lipgp/common.hpp"

#include <vector>

namespace lipgp::experiment {

/// Per-column 100 * mean((pred - truth)^2) / mean(truth^2).
Vec nmse_percent(const Mat& pred, const Mat& truth);
double nmse_percent(const Vec& pred, const Vec& truth);

/// Sum over columns of the per-column mean squared error.
double global_mse(const Mat& pred, const Mat& truth);

struct Summary {
  double median = 0.0, q1 = 0.0, q3 = 0.0, min = 0.0, max = 0.0;
  int count = 0;
};

/// Order statistics with linear interpolation between closest ranks.
Summary summarize(std::vector<double> values);
double quantile(std::vector<double> values, double p);

}  // namespace lipgp::experiment
