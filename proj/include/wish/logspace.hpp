#pragma once

#include <cmath>
#include <limits>
#include <span>

namespace wish {

// Weights live in natural-log space throughout; -inf is the log of weight 0.
inline constexpr double kLogZero = -std::numeric_limits<double>::infinity();

inline bool is_log_zero(double x) { return std::isinf(x) && x < 0.0; }

// log(exp(a) + exp(b)) without leaving log space.
inline double log_add(double a, double b) {
  if (is_log_zero(a)) return b;
  if (is_log_zero(b)) return a;
  if (a < b) std::swap(a, b);
  return a + std::log1p(std::exp(b - a));
}

// Two-pass log-sum-exp over a range, left to right. -inf terms drop out;
// an all--inf (or empty) input yields -inf.
inline double log_sum_exp(std::span<const double> xs) {
  double m = kLogZero;
  for (double x : xs) {
    if (x > m) m = x;
  }
  if (is_log_zero(m)) return kLogZero;
  double sum = 0.0;
  for (double x : xs) {
    sum += std::exp(x - m);
  }
  return m + std::log(sum);
}

}  // namespace wish
