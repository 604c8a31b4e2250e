#pragma once

#include <algorithm>
#include <cmath>
#include <span>

#include "stlq/errors.hpp"

namespace stlq {

// Smooth upper surrogate for max:  (1/beta) * log(sum_i exp(beta*x_i)).
// Computed max-shifted so exp never overflows:
//   max(x) <= result <= max(x) + log(n)/beta.
inline double log_sum_exp_max(std::span<const double> values, double beta) {
  if (values.empty()) throw error("log_sum_exp_max: empty input");
  const double m = *std::max_element(values.begin(), values.end());
  double sum = 0.0;
  for (double v : values) sum += std::exp(beta * (v - m));
  return m + std::log(sum) / beta;
}

// Smooth lower surrogate for min:  -(1/beta) * log(sum_i exp(-beta*x_i)),
// with the mirror-image bounds  min(x) - log(n)/beta <= result <= min(x).
inline double log_sum_exp_min(std::span<const double> values, double beta) {
  if (values.empty()) throw error("log_sum_exp_min: empty input");
  const double m = *std::min_element(values.begin(), values.end());
  double sum = 0.0;
  for (double v : values) sum += std::exp(-beta * (v - m));
  return m - std::log(sum) / beta;
}

}  // namespace stlq
