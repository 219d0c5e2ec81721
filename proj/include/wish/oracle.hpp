#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <vector>

#include "wish/logspace.hpp"
#include "wish/model.hpp"

namespace wish {

inline constexpr std::uint32_t kDefaultOracleCap = 24;

namespace detail {

inline void check_cap(const BinaryModel& m, std::uint32_t cap, const char* who) {
  if (m.n > cap) {
    throw std::invalid_argument(std::string(who) + ": model exceeds enumeration cap");
  }
}

}  // namespace detail

// Exact log partition function by full enumeration (two passes: max, then
// shifted sum; enumeration order is fixed so the result is deterministic).
inline double brute_force_log_z(const BinaryModel& m, std::uint32_t cap = kDefaultOracleCap) {
  detail::check_cap(m, cap, "brute_force_log_z");
  const std::uint64_t total = std::uint64_t{1} << m.n;
  double max_w = kLogZero;
  for (std::uint64_t x = 0; x < total; ++x) max_w = std::max(max_w, log_weight(m, x));
  if (is_log_zero(max_w)) return kLogZero;
  double acc = 0.0;
  for (std::uint64_t x = 0; x < total; ++x) {
    const double w = log_weight(m, x);
    if (!is_log_zero(w)) acc += std::exp(w - max_w);
  }
  return max_w + std::log(acc);
}

// All 2^n log-weights sorted descending, plus the level quantiles
// b_i = weight of the 2^i-th heaviest configuration.
struct QuantileProfile {
  std::size_t n = 0;
  std::vector<double> sorted_log_weights;
  std::vector<double> b;
};

inline QuantileProfile brute_force_quantiles(const BinaryModel& m,
                                             std::uint32_t cap = kDefaultOracleCap) {
  detail::check_cap(m, cap, "brute_force_quantiles");
  QuantileProfile profile;
  profile.n = m.n;
  const std::uint64_t total = std::uint64_t{1} << m.n;
  profile.sorted_log_weights.reserve(total);
  for (std::uint64_t x = 0; x < total; ++x) profile.sorted_log_weights.push_back(log_weight(m, x));
  std::sort(profile.sorted_log_weights.begin(), profile.sorted_log_weights.end(),
            std::greater<double>());
  profile.b.resize(m.n + 1);
  for (std::size_t i = 0; i <= m.n; ++i) {
    profile.b[i] = profile.sorted_log_weights[(std::uint64_t{1} << i) - 1];
  }
  return profile;
}

// Exact tail count G(u) = |{x : w(x) >= u}| for u > 0 in weight space.
inline std::uint64_t brute_force_tail(const BinaryModel& m, double u,
                                      std::uint32_t cap = kDefaultOracleCap) {
  detail::check_cap(m, cap, "brute_force_tail");
  if (!(u > 0.0)) throw std::invalid_argument("brute_force_tail: u must be positive");
  const double log_u = std::log(u);
  const std::uint64_t total = std::uint64_t{1} << m.n;
  std::uint64_t count = 0;
  for (std::uint64_t x = 0; x < total; ++x) {
    if (log_weight(m, x) >= log_u) ++count;
  }
  return count;
}

inline double log_z_from_profile(const QuantileProfile& profile) {
  return log_sum_exp(profile.sorted_log_weights);
}

// The two-sided quantile envelope around the partition function:
//   lower = b_0 + sum_i b_{min(i+c+1,n)} 2^i
//   upper = b_0 + sum_i b_{max(i+1-c,0)} 2^i
// The envelope must contain Z and span at most a factor 2^{2c}.
struct EnvelopeCheck {
  double log_lower = kLogZero;
  double log_upper = kLogZero;
  double log_z = kLogZero;
  bool within_factor = false;
  bool bounds_z = false;
  bool pass = false;
};

inline EnvelopeCheck check_quantile_envelope(const QuantileProfile& profile, std::uint32_t c) {
  if (c < 1) throw std::invalid_argument("check_quantile_envelope: c must be >= 1");
  const std::size_t n = profile.n;
  const auto& b = profile.b;
  constexpr double kLn2 = 0.6931471805599453;
  constexpr double kTol = 1e-9;

  std::vector<double> lower_terms;
  std::vector<double> upper_terms;
  lower_terms.reserve(n + 1);
  upper_terms.reserve(n + 1);
  lower_terms.push_back(b[0]);
  upper_terms.push_back(b[0]);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t lo_idx = std::min(i + c + 1, n);
    const std::size_t hi_idx = i + 1 > c ? i + 1 - c : 0;
    lower_terms.push_back(b[lo_idx] + static_cast<double>(i) * kLn2);
    upper_terms.push_back(b[hi_idx] + static_cast<double>(i) * kLn2);
  }

  EnvelopeCheck check;
  check.log_lower = log_sum_exp(lower_terms);
  check.log_upper = log_sum_exp(upper_terms);
  check.log_z = log_z_from_profile(profile);
  check.within_factor = check.log_upper <= check.log_lower + 2.0 * c * kLn2 + kTol;
  check.bounds_z =
      check.log_lower - kTol <= check.log_z && check.log_z <= check.log_upper + kTol;
  check.pass = check.within_factor && check.bounds_z;
  return check;
}

}  // namespace wish
