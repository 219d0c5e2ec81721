#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "wish/executor.hpp"
#include "wish/logspace.hpp"
#include "wish/model.hpp"
#include "wish/parity.hpp"
#include "wish/rng.hpp"
#include "wish/solver.hpp"

namespace wish {

inline constexpr double kLn2 = 0.6931471805599453;
// Largest alpha for which the 16x guarantee of the median analysis holds.
inline constexpr double kMaxCertifiedAlpha = 0.0042;

struct WishConfig {
  double delta = 0.1;
  double alpha = kMaxCertifiedAlpha;
  std::uint32_t t_override = 0;  // 0 = use the repetition formula
  std::uint32_t c = 2;           // slack constant in the reported factor 2^{2c}
  SolveOptions budget;           // per-instance solver budget
  std::uint64_t master_seed = 0;
};

// What the run can promise about its estimate:
//   kExact16x     every instance solved to proven optimality (or proven
//                 empty), so the estimate is a 16-approximation w.h.p.
//   kFactor16L    some instances timed out but each carries a proven
//                 suboptimality ratio <= L, giving a 16L-approximation.
//   kLowerBound   estimate/16 is still a lower bound on Z w.h.p., nothing
//                 tighter is known.
enum class Guarantee { kExact16x, kFactor16L, kLowerBound };

struct InstanceRecord {
  std::uint32_t i = 0;
  std::uint32_t t = 0;
  std::uint64_t seed = 0;
  MapResult result;
  bool failed = false;
};

struct WishResult {
  std::size_t n = 0;
  std::uint32_t T = 0;
  bool t_overridden = false;
  std::vector<double> medians;            // M_0..M_n
  std::vector<InstanceRecord> instances;  // ordered by (i, t)
  double log_estimate = kLogZero;
  Guarantee guarantee = Guarantee::kLowerBound;
  double log_suboptimality = 0.0;  // ln L when guarantee is kFactor16L
  bool certified = false;          // formula repetitions and alpha both honored
  bool degraded = false;           // some instance crashed
  double failure_probability = 0.0;
};

// Repetitions per level: ceil(ln(1/delta)/alpha * ln n).
inline std::uint32_t compute_T(double delta, double alpha, std::size_t n) {
  if (!(delta > 0.0 && delta < 1.0)) throw std::invalid_argument("compute_T: delta not in (0,1)");
  if (!(alpha > 0.0)) throw std::invalid_argument("compute_T: alpha must be positive");
  if (n < 2) throw std::invalid_argument("compute_T: need n >= 2");
  const double t = std::ceil(std::log(1.0 / delta) / alpha * std::log(static_cast<double>(n)));
  return t < 1.0 ? 1u : static_cast<std::uint32_t>(t);
}

// Combines the level medians into the estimate
//   M_0 + sum_{i=0}^{n-1} M_{i+1} 2^i
// in log space; -inf medians contribute nothing, all -inf gives -inf.
inline double estimate_log_w(const std::vector<double>& medians) {
  if (medians.empty()) throw std::invalid_argument("estimate_log_w: no medians");
  const std::size_t n = medians.size() - 1;
  std::vector<double> terms;
  terms.reserve(medians.size());
  terms.push_back(medians[0]);
  for (std::size_t i = 0; i < n; ++i) {
    terms.push_back(medians[i + 1] + static_cast<double>(i) * kLn2);
  }
  return log_sum_exp(terms);
}

namespace detail {

// Lower of the two middle values for even counts, keeping the estimate on
// the conservative side.
inline double median_low(std::vector<double> values) {
  std::sort(values.begin(), values.end());
  return values[(values.size() - 1) / 2];
}

}  // namespace detail

// Runs the full estimation schedule: for every constraint count i in 0..n
// and repetition t in 1..T, sample a parity system from a seed derived from
// (master_seed, i, t), maximize the model weight under it, and aggregate
// level medians into the estimate. The result is a pure function of
// (model, config); the executor only decides scheduling.
inline WishResult run_wish(const BinaryModel& model, const WishConfig& config, Executor& executor) {
  if (model.n < 1) throw std::invalid_argument("run_wish: model must have at least one bit");
  const std::size_t n = model.n;
  const std::uint32_t formula_T =
      compute_T(config.delta, config.alpha, std::max<std::size_t>(n, 2));
  const std::uint32_t T = config.t_override ? config.t_override : formula_T;

  WishResult result;
  result.n = n;
  result.T = T;
  result.t_overridden = config.t_override != 0;
  result.failure_probability = config.delta;
  result.instances.resize((n + 1) * static_cast<std::size_t>(T));

  executor.run(result.instances.size(), [&](std::size_t k) {
    const std::uint32_t i = static_cast<std::uint32_t>(k / T);
    const std::uint32_t t = static_cast<std::uint32_t>(k % T) + 1;
    InstanceRecord& record = result.instances[k];
    record.i = i;
    record.t = t;
    record.seed = derive_seed(config.master_seed, i, t);
    try {
      Rng rng(record.seed);
      const ParitySystem sys = sample_parity_system(n, i, rng);
      record.result = solve(model, sys, config.budget);
    } catch (...) {
      record.failed = true;
      record.result = MapResult{};
    }
  });

  result.medians.resize(n + 1);
  for (std::size_t i = 0; i <= n; ++i) {
    std::vector<double> values(T);
    for (std::uint32_t t = 0; t < T; ++t) {
      const InstanceRecord& record = result.instances[i * T + t];
      values[t] = record.failed ? kLogZero : record.result.best_log_weight;
    }
    result.medians[i] = detail::median_low(std::move(values));
  }
  result.log_estimate = estimate_log_w(result.medians);

  bool all_exact = true;
  bool ratio_known = true;
  double log_L = 0.0;
  for (const InstanceRecord& record : result.instances) {
    if (record.failed) {
      result.degraded = true;
      all_exact = false;
      ratio_known = false;
      break;
    }
    if (record.result.status == MapStatus::kTimeout) {
      all_exact = false;
      const double lb = record.result.best_log_weight;
      const double ub = record.result.proven_log_ub;
      if (is_log_zero(lb) && !is_log_zero(ub)) {
        ratio_known = false;
      } else if (!is_log_zero(ub)) {
        log_L = std::max(log_L, ub - lb);
      }
    }
  }
  if (all_exact) {
    result.guarantee = Guarantee::kExact16x;
  } else if (ratio_known) {
    result.guarantee = Guarantee::kFactor16L;
    result.log_suboptimality = log_L;
  } else {
    result.guarantee = Guarantee::kLowerBound;
  }
  result.certified = result.guarantee == Guarantee::kExact16x &&
                     config.alpha <= kMaxCertifiedAlpha + 1e-15 && T >= formula_T;
  return result;
}

// Tail count estimate: q is the deepest level whose median (and all
// shallower ones) still clears u; the estimate is 2^q configurations of
// weight >= u, or zero when even the unconstrained optimum falls short.
struct TailEstimate {
  std::int64_t q = -1;  // -1 encodes a zero estimate
  double count = 0.0;   // 2^q, or 0
};

inline TailEstimate estimate_tail(const WishResult& result, double u) {
  if (!(u > 0.0)) throw std::invalid_argument("estimate_tail: u must be positive");
  const double log_u = std::log(u);
  TailEstimate tail;
  for (std::size_t i = 0; i < result.medians.size(); ++i) {
    if (result.medians[i] < log_u) break;
    tail.q = static_cast<std::int64_t>(i);
  }
  tail.count = tail.q < 0 ? 0.0 : std::exp2(static_cast<double>(tail.q));
  return tail;
}

// Smallest l with (1+epsilon)^l >= 16, computed by repeated multiplication
// so thresholds like epsilon = 1 or 3 land exactly on the integer.
inline std::uint32_t refinement_copies(double epsilon) {
  if (!(epsilon > 0.0)) throw std::invalid_argument("refinement_copies: epsilon must be positive");
  std::uint32_t l = 1;
  double p = 1.0 + epsilon;
  while (p < 16.0) {
    p *= 1.0 + epsilon;
    ++l;
  }
  return l;
}

// Sharper estimate via the product construction: estimate Z^l on l disjoint
// copies and take the l-th root, turning the 16x factor into 16^{1/l} <=
// 1 + epsilon at l times the bit count.
struct RefineResult {
  std::uint32_t copies = 1;
  double log_estimate = kLogZero;    // log of the refined estimate of Z
  double approx_factor = 16.0;       // 16^{1/copies}
  WishResult power_run;              // the run on the product model
};

inline RefineResult refine(const BinaryModel& model, double epsilon, const WishConfig& config,
                           Executor& executor, std::uint32_t bit_cap = 48) {
  const std::uint32_t copies = refinement_copies(epsilon);
  if (model.n * copies > bit_cap) {
    throw std::invalid_argument("refine: product model exceeds bit cap");
  }
  RefineResult refined;
  refined.copies = copies;
  const BinaryModel powered = power_model(model, copies);
  refined.power_run = run_wish(powered, config, executor);
  refined.log_estimate = refined.power_run.log_estimate / copies;
  refined.approx_factor = std::pow(16.0, 1.0 / copies);
  return refined;
}

}  // namespace wish
