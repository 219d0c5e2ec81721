#pragma once

#include <algorithm>
#include <bit>
#include <chrono>
#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>
#include <vector>

#include "wish/bitvec.hpp"
#include "wish/logspace.hpp"
#include "wish/model.hpp"
#include "wish/parity.hpp"

namespace wish {

enum class MapStatus { kOptimal, kTimeout, kEmpty };

// Outcome of one constrained MAP query max_x w(x) s.t. A x = b mod 2.
// EMPTY means it is proven that no satisfying assignment has weight > 0
// (the max over the empty support is weight 0, i.e. -inf). On TIMEOUT,
// best_log_weight is a valid lower bound on the true constrained maximum
// and proven_log_ub a valid upper bound, so the suboptimality ratio of the
// incumbent is known.
struct MapResult {
  MapStatus status = MapStatus::kEmpty;
  double best_log_weight = kLogZero;
  std::optional<BitVec> best_assignment;
  double proven_log_ub = kLogZero;
  std::uint64_t nodes_expanded = 0;
  double wall_time = 0.0;
};

struct SolveOptions {
  std::uint64_t node_limit = 0;      // 0 = unlimited
  double time_limit_seconds = 0.0;   // 0 = unlimited
  bool prune = true;                 // disable only to test pruning soundness
};

// Admissible bound for a partial assignment (entries of `partial` are
// 0, 1, or -1 for unassigned): the sum over factors of the largest table
// entry consistent with the assigned bits. Summation is left to right in
// factor order, the same order log_weight uses, so for a full assignment
// the bound equals log_weight bit for bit, and IEEE addition monotonicity
// makes the bound dominate every completion's log_weight as computed.
inline double upper_bound(const BinaryModel& m, const std::vector<std::int8_t>& partial) {
  if (partial.size() != m.n) throw std::invalid_argument("upper_bound: partial length mismatch");
  double total = 0.0;
  for (const Factor& f : m.graph.factors) {
    const std::size_t arity = f.scope.size();
    double best = kLogZero;
    for (std::size_t idx = 0; idx < f.log_table.size(); ++idx) {
      bool ok = true;
      for (std::size_t p = 0; p < arity; ++p) {
        const std::int8_t a = partial[f.scope[p]];
        if (a >= 0 && a != static_cast<std::int8_t>((idx >> (arity - 1 - p)) & 1)) {
          ok = false;
          break;
        }
      }
      if (ok && f.log_table[idx] > best) best = f.log_table[idx];
    }
    total += best;
  }
  return total;
}

// Exhaustive reference oracle: enumerates all 2^n assignments.
inline MapResult brute_force_map(const BinaryModel& m, const ParitySystem& sys,
                                 std::uint32_t cap = 24) {
  if (sys.n != m.n) throw std::invalid_argument("brute_force_map: dimension mismatch");
  if (m.n > cap) throw std::invalid_argument("brute_force_map: model exceeds enumeration cap");
  const auto start = std::chrono::steady_clock::now();

  std::vector<std::uint64_t> row_masks(sys.m);
  std::uint64_t rhs = 0;
  for (std::size_t r = 0; r < sys.m; ++r) {
    for (std::size_t c = 0; c < sys.n; ++c) {
      if (sys.rows[r].get(c)) row_masks[r] |= std::uint64_t{1} << c;
    }
    if (sys.b.get(r)) rhs |= std::uint64_t{1} << r;
  }

  MapResult result;
  const std::uint64_t total = std::uint64_t{1} << m.n;
  for (std::uint64_t x = 0; x < total; ++x) {
    bool ok = true;
    for (std::size_t r = 0; r < sys.m; ++r) {
      const bool parity = std::popcount(row_masks[r] & x) & 1;
      if (parity != static_cast<bool>((rhs >> r) & 1)) {
        ok = false;
        break;
      }
    }
    if (!ok) continue;
    const double w = log_weight(m, x);
    if (is_log_zero(w)) continue;
    if (!result.best_assignment || w > result.best_log_weight) {
      result.best_log_weight = w;
      result.best_assignment = BitVec::from_u64(m.n, x);
    }
  }
  result.nodes_expanded = total;
  result.status = result.best_assignment ? MapStatus::kOptimal : MapStatus::kEmpty;
  result.proven_log_ub = result.best_log_weight;
  result.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return result;
}

namespace detail {

// Depth-first branch-and-bound over bit assignments under an incrementally
// propagated parity system, with per-factor consistent-maximum tracking.
class BranchAndBound {
 public:
  BranchAndBound(const BinaryModel& m, const ReducedParitySystem& red, const SolveOptions& opt)
      : model_(m), opt_(opt), prop_(red), assignment_(m.n, -1) {
    const std::size_t nf = m.graph.factors.size();
    cur_max_.resize(nf);
    touching_.resize(m.n);
    for (std::size_t a = 0; a < nf; ++a) {
      for (std::uint32_t v : m.graph.factors[a].scope) touching_[v].push_back(a);
      cur_max_[a] = factor_max(a);
    }
    var_order_ = make_var_order(red);
  }

  MapResult run() {
    const auto start = std::chrono::steady_clock::now();
    start_ = start;
    MapResult result;
    if (!prop_.feasible()) {
      result.status = MapStatus::kEmpty;
      result.wall_time = elapsed();
      return result;
    }
    // Bits the system forces before any branching.
    const Propagation root = prop_.initial_forced();
    std::size_t pushes = 0;
    TrailMark mark = trail_mark();
    const bool ok = apply_forced(root.forced, pushes);
    if (ok) {
      search(0);
    }
    unwind(pushes, mark);

    result.nodes_expanded = nodes_;
    result.wall_time = elapsed();
    if (stopped_) {
      result.status = MapStatus::kTimeout;
      result.best_log_weight = incumbent_;
      result.best_assignment = incumbent_assignment_;
      result.proven_log_ub = std::max(incumbent_, frontier_ub_);
    } else if (incumbent_assignment_) {
      result.status = MapStatus::kOptimal;
      result.best_log_weight = incumbent_;
      result.best_assignment = incumbent_assignment_;
      result.proven_log_ub = incumbent_;
    } else {
      result.status = MapStatus::kEmpty;
    }
    return result;
  }

 private:
  struct TrailMark {
    std::size_t trail_size;
  };

  double factor_max(std::size_t a) const {
    const Factor& f = model_.graph.factors[a];
    const std::size_t arity = f.scope.size();
    double best = kLogZero;
    for (std::size_t idx = 0; idx < f.log_table.size(); ++idx) {
      bool ok = true;
      for (std::size_t p = 0; p < arity; ++p) {
        const std::int8_t asg = assignment_[f.scope[p]];
        if (asg >= 0 && asg != static_cast<std::int8_t>((idx >> (arity - 1 - p)) & 1)) {
          ok = false;
          break;
        }
      }
      if (ok && f.log_table[idx] > best) best = f.log_table[idx];
    }
    return best;
  }

  double bound() const {
    double total = 0.0;
    for (double c : cur_max_) total += c;
    return total;
  }

  // Static search order: bits in many parity rows first, then by the spread
  // of the factor entries they touch, then by index.
  std::vector<std::uint32_t> make_var_order(const ReducedParitySystem& red) const {
    std::vector<std::size_t> row_count(model_.n, 0);
    for (const BitVec& row : red.rows) {
      for (std::size_t c = 0; c < model_.n; ++c) {
        if (row.get(c)) ++row_count[c];
      }
    }
    std::vector<double> influence(model_.n, 0.0);
    for (const Factor& f : model_.graph.factors) {
      double lo = std::numeric_limits<double>::infinity();
      double hi = kLogZero;
      for (double e : f.log_table) {
        lo = std::min(lo, e);
        hi = std::max(hi, e);
      }
      if (is_log_zero(hi)) continue;
      const double spread = hi - lo;  // +inf when some entry is -inf
      for (std::uint32_t v : f.scope) influence[v] += spread;
    }
    std::vector<std::uint32_t> order(model_.n);
    for (std::size_t v = 0; v < model_.n; ++v) order[v] = static_cast<std::uint32_t>(v);
    std::stable_sort(order.begin(), order.end(), [&](std::uint32_t a, std::uint32_t b) {
      if (row_count[a] != row_count[b]) return row_count[a] > row_count[b];
      if (influence[a] != influence[b]) return influence[a] > influence[b];
      return a < b;
    });
    return order;
  }

  double elapsed() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

  bool budget_hit() {
    if (opt_.node_limit && nodes_ >= opt_.node_limit) return true;
    if (opt_.time_limit_seconds > 0.0 && (nodes_ & 255) == 0 &&
        elapsed() >= opt_.time_limit_seconds) {
      return true;
    }
    return false;
  }

  TrailMark trail_mark() const { return {trail_.size()}; }

  // Assigns one bit: updates the factor maxima (with undo records) and
  // pushes into the propagator. Returns false on parity conflict; the
  // caller unwinds via the matching mark / push count either way.
  bool assign(std::uint32_t var, bool value, std::size_t& pushes,
              std::vector<std::pair<std::uint32_t, bool>>& forced_out) {
    assignment_[var] = value ? 1 : 0;
    trail_.push_back({var, kAssign, 0.0});
    for (std::size_t a : touching_[var]) {
      trail_.push_back({static_cast<std::uint32_t>(a), kFactor, cur_max_[a]});
      cur_max_[a] = factor_max(a);
    }
    const Propagation p = prop_.push(var, value);
    ++pushes;
    if (p.conflict) return false;
    forced_out.insert(forced_out.end(), p.forced.begin(), p.forced.end());
    return true;
  }

  // Applies a queue of forced bits, cascading. Duplicate reports of a bit
  // already assigned the same way are skipped; a contradictory report is a
  // conflict.
  bool apply_forced(std::vector<std::pair<std::uint32_t, bool>> queue, std::size_t& pushes) {
    for (std::size_t k = 0; k < queue.size(); ++k) {
      const auto [var, value] = queue[k];
      const std::int8_t asg = assignment_[var];
      if (asg >= 0) {
        if (asg != static_cast<std::int8_t>(value)) return false;
        continue;
      }
      if (!assign(var, value, pushes, queue)) return false;
    }
    return true;
  }

  void unwind(std::size_t pushes, TrailMark mark) {
    while (pushes--) prop_.pop();
    while (trail_.size() > mark.trail_size) {
      const TrailEntry& e = trail_.back();
      if (e.kind == kAssign) {
        assignment_[e.index] = -1;
      } else {
        cur_max_[e.index] = e.saved;
      }
      trail_.pop_back();
    }
  }

  std::uint32_t pick_var() const {
    for (std::uint32_t v : var_order_) {
      if (assignment_[v] < 0) return v;
    }
    return static_cast<std::uint32_t>(model_.n);
  }

  // Heuristic score for branching on var=value: what the touching factors
  // would contribute, summed in factor order.
  double value_score(std::uint32_t var, bool value) {
    assignment_[var] = value ? 1 : 0;
    double total = 0.0;
    for (std::size_t a : touching_[var]) total += factor_max(a);
    assignment_[var] = -1;
    return total;
  }

  void search(std::size_t depth) {
    const double node_bound = bound();
    if (stopped_) {
      frontier_ub_ = std::max(frontier_ub_, node_bound);
      return;
    }
    ++nodes_;
    if (budget_hit()) {
      stopped_ = true;
      frontier_ub_ = std::max(frontier_ub_, node_bound);
      return;
    }
    if (opt_.prune && node_bound <= incumbent_) return;
    if (is_log_zero(node_bound)) return;

    const std::uint32_t var = pick_var();
    if (var >= model_.n) {
      // Leaf: every factor is pinned to one entry, so node_bound is the
      // exact log-weight in canonical summation order. Zero-weight leaves
      // never become the incumbent; EMPTY means no positive-weight support.
      if (node_bound > incumbent_) {
        incumbent_ = node_bound;
        BitVec x(model_.n);
        for (std::size_t v = 0; v < model_.n; ++v) x.set(v, assignment_[v] == 1);
        incumbent_assignment_ = std::move(x);
      }
      return;
    }

    const bool first = value_score(var, true) > value_score(var, false);
    for (int k = 0; k < 2; ++k) {
      const bool value = (k == 0) ? first : !first;
      std::size_t pushes = 0;
      const TrailMark mark = trail_mark();
      std::vector<std::pair<std::uint32_t, bool>> queue;
      queue.emplace_back(var, value);
      if (apply_forced(std::move(queue), pushes)) {
        search(depth + 1);
      }
      unwind(pushes, mark);
      if (stopped_) {
        // The untried sibling is covered by this node's bound.
        if (k == 0) frontier_ub_ = std::max(frontier_ub_, node_bound);
        return;
      }
    }
  }

  static constexpr std::uint8_t kAssign = 0;
  static constexpr std::uint8_t kFactor = 1;
  struct TrailEntry {
    std::uint32_t index;
    std::uint8_t kind;
    double saved;
  };

  const BinaryModel& model_;
  SolveOptions opt_;
  ParityPropagator prop_;
  std::vector<std::int8_t> assignment_;
  std::vector<double> cur_max_;
  std::vector<std::vector<std::size_t>> touching_;
  std::vector<std::uint32_t> var_order_;
  std::vector<TrailEntry> trail_;
  std::chrono::steady_clock::time_point start_;
  std::uint64_t nodes_ = 0;
  bool stopped_ = false;
  double incumbent_ = kLogZero;
  std::optional<BitVec> incumbent_assignment_;
  double frontier_ub_ = kLogZero;
};

}  // namespace detail

// Constrained MAP via branch-and-bound: row-reduce the system, propagate
// forced bits at every node, prune with the per-factor admissible bound.
// Exhausting the tree yields OPTIMAL (or EMPTY when nothing of positive
// weight satisfies the system); hitting the budget yields TIMEOUT with the
// incumbent and a proven upper bound from the unexplored frontier.
inline MapResult solve(const BinaryModel& m, const ParitySystem& sys,
                       const SolveOptions& opt = {}) {
  if (sys.n != m.n) throw std::invalid_argument("solve: dimension mismatch");
  const ReducedParitySystem red = row_reduce(sys);
  detail::BranchAndBound bb(m, red, opt);
  return bb.run();
}

}  // namespace wish
