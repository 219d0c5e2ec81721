#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "wish/bitvec.hpp"
#include "wish/rng.hpp"

namespace wish {

// A system of parity constraints A x = b mod 2 over n binary variables.
// Row i of A is stored as a BitVec of length n.
struct ParitySystem {
  std::size_t n = 0;
  std::size_t m = 0;
  std::vector<BitVec> rows;
  BitVec b;

  ParitySystem() = default;
  ParitySystem(std::size_t n_, std::size_t m_) : n(n_), m(m_), rows(m_, BitVec(n_)), b(m_) {}
};

// Uniform draw: every entry of A and b is an independent fair coin. Draw
// order is row-wise, the n matrix bits of a row followed by its b bit, so
// a seed pins down the system exactly.
inline ParitySystem sample_parity_system(std::size_t n, std::size_t m, Rng& rng) {
  ParitySystem sys(n, m);
  for (std::size_t r = 0; r < m; ++r) {
    for (std::size_t c = 0; c < n; ++c) {
      if (rng() & 1u) sys.rows[r].set(c, true);
    }
    if (rng() & 1u) sys.b.set(r, true);
  }
  return sys;
}

inline bool evaluate(const ParitySystem& sys, const BitVec& x) {
  if (x.size() != sys.n) throw std::invalid_argument("evaluate: assignment length mismatch");
  for (std::size_t r = 0; r < sys.m; ++r) {
    if (sys.rows[r].and_parity(x) != sys.b.get(r)) return false;
  }
  return true;
}

// Debug/fixture dump: one line per row, matrix bits then "| b".
inline std::string to_text(const ParitySystem& sys) {
  std::string out;
  for (std::size_t r = 0; r < sys.m; ++r) {
    out += sys.rows[r].to_string();
    out += " | ";
    out += sys.b.get(r) ? '1' : '0';
    out += '\n';
  }
  return out;
}

inline ParitySystem parity_from_text(const std::string& text, std::size_t n) {
  ParitySystem sys;
  sys.n = n;
  std::size_t pos = 0;
  std::vector<bool> rhs;
  while (pos < text.size()) {
    std::size_t eol = text.find('\n', pos);
    if (eol == std::string::npos) eol = text.size();
    const std::string line = text.substr(pos, eol - pos);
    pos = eol + 1;
    if (line.empty()) continue;
    const std::size_t bar = line.find('|');
    if (bar == std::string::npos) throw std::invalid_argument("parity_from_text: missing '|'");
    BitVec row(n);
    std::size_t col = 0;
    for (std::size_t k = 0; k < bar; ++k) {
      const char ch = line[k];
      if (ch == ' ' || ch == '\t') continue;
      if (ch != '0' && ch != '1') throw std::invalid_argument("parity_from_text: bad matrix bit");
      if (col >= n) throw std::invalid_argument("parity_from_text: row longer than n");
      row.set(col++, ch == '1');
    }
    if (col != n) throw std::invalid_argument("parity_from_text: row shorter than n");
    bool bit = false;
    bool seen = false;
    for (std::size_t k = bar + 1; k < line.size(); ++k) {
      const char ch = line[k];
      if (ch == ' ' || ch == '\t') continue;
      if ((ch != '0' && ch != '1') || seen)
        throw std::invalid_argument("parity_from_text: bad right-hand side");
      bit = ch == '1';
      seen = true;
    }
    if (!seen) throw std::invalid_argument("parity_from_text: missing right-hand side");
    sys.rows.push_back(std::move(row));
    rhs.push_back(bit);
  }
  sys.m = sys.rows.size();
  sys.b = BitVec(sys.m);
  for (std::size_t r = 0; r < sys.m; ++r) sys.b.set(r, rhs[r]);
  return sys;
}

// Reduced row-echelon form of A|b over GF(2). Rows are stored augmented:
// bit n holds the right-hand side. Only nonzero pivot rows are kept;
// `pivots[k]` is the pivot column of row k, ascending.
struct ReducedParitySystem {
  std::size_t n = 0;
  std::vector<BitVec> rows;
  std::vector<std::uint32_t> pivots;
  bool feasible = true;

  std::size_t rank() const { return rows.size(); }
};

namespace detail {

// In-place RREF of augmented rows (bit n = rhs). Drops zero rows, clears
// `feasible` on a 0 = 1 row, returns pivot columns ascending.
inline void rref(std::size_t n, std::vector<BitVec>& rows, std::vector<std::uint32_t>& pivots,
                 bool& feasible) {
  pivots.clear();
  std::size_t next = 0;
  for (std::size_t col = 0; col < n && next < rows.size(); ++col) {
    std::size_t pivot_row = rows.size();
    for (std::size_t r = next; r < rows.size(); ++r) {
      if (rows[r].get(col)) {
        pivot_row = r;
        break;
      }
    }
    if (pivot_row == rows.size()) continue;
    std::swap(rows[next], rows[pivot_row]);
    for (std::size_t r = 0; r < rows.size(); ++r) {
      if (r != next && rows[r].get(col)) rows[r] ^= rows[next];
    }
    pivots.push_back(static_cast<std::uint32_t>(col));
    ++next;
  }
  for (std::size_t r = next; r < rows.size(); ++r) {
    if (rows[r].get(n)) feasible = false;
  }
  rows.resize(next);
}

inline void collect_units(std::size_t n, const std::vector<BitVec>& rows,
                          std::vector<std::pair<std::uint32_t, bool>>& out) {
  for (const BitVec& row : rows) {
    if (row.count_below(n) != 1) continue;
    out.emplace_back(static_cast<std::uint32_t>(row.lowest_set_below(n)), row.get(n));
  }
}

}  // namespace detail

inline ReducedParitySystem row_reduce(const ParitySystem& sys) {
  ReducedParitySystem red;
  red.n = sys.n;
  red.rows.reserve(sys.m);
  for (std::size_t r = 0; r < sys.m; ++r) {
    BitVec row(sys.n + 1);
    for (std::size_t c = 0; c < sys.n; ++c) row.set(c, sys.rows[r].get(c));
    row.set(sys.n, sys.b.get(r));
    red.rows.push_back(std::move(row));
  }
  detail::rref(sys.n, red.rows, red.pivots, red.feasible);
  if (!red.feasible) {
    red.rows.clear();
    red.pivots.clear();
  }
  return red;
}

inline bool evaluate(const ReducedParitySystem& red, const BitVec& x) {
  if (x.size() != red.n) throw std::invalid_argument("evaluate: assignment length mismatch");
  if (!red.feasible) return false;
  for (const BitVec& row : red.rows) {
    bool acc = row.get(red.n);
    for (std::size_t c = 0; c < red.n; ++c) {
      if (row.get(c) && x.get(c)) acc = !acc;
    }
    if (acc) return false;
  }
  return true;
}

// Result of constraint propagation: either a proven conflict, or the list
// of (variable, value) pairs implied by the current state. Variables in
// the substituted partial assignment never reappear in `forced`.
struct Propagation {
  bool conflict = false;
  std::vector<std::pair<std::uint32_t, bool>> forced;
};

// Substitutes the partial assignment, re-reduces from scratch, and reports
// every implied bit (the unit rows of the new RREF), or a conflict.
// Stateless reference version; ParityPropagator below must agree with it
// on every reachable state.
inline Propagation propagate(const ReducedParitySystem& red,
                             const std::vector<std::pair<std::uint32_t, bool>>& partial) {
  if (!red.feasible) return {true, {}};
  std::vector<BitVec> rows = red.rows;
  for (const auto& [var, value] : partial) {
    if (var >= red.n) throw std::invalid_argument("propagate: variable index out of range");
    for (BitVec& row : rows) {
      if (!row.get(var)) continue;
      row.set(var, false);
      if (value) row.flip(red.n);
    }
  }
  Propagation result;
  std::vector<std::uint32_t> pivots;
  bool feasible = true;
  detail::rref(red.n, rows, pivots, feasible);
  if (!feasible) {
    result.conflict = true;
    return result;
  }
  detail::collect_units(red.n, rows, result.forced);
  return result;
}

// Incremental propagation state for depth-first search. push() substitutes
// one bit, repairs the reduced row-echelon form, and reports the currently
// implied bits; pop() restores the previous state exactly. The RREF of a
// rowspace is unique and substitution commutes with row operations, so the
// state after any sequence of pushes is identical to what the stateless
// propagate() computes for the same partial assignment. Snapshots are full
// copies per depth, cheap at the row counts the search sees.
class ParityPropagator {
 public:
  explicit ParityPropagator(const ReducedParitySystem& red)
      : n_(red.n), rows_(red.rows), pivots_(red.pivots), feasible_(red.feasible) {}

  bool feasible() const { return feasible_; }
  std::size_t depth() const { return stack_.size(); }

  // Bits already implied before anything is assigned.
  Propagation initial_forced() const {
    Propagation result;
    if (!feasible_) {
      result.conflict = true;
      return result;
    }
    detail::collect_units(n_, rows_, result.forced);
    return result;
  }

  Propagation push(std::uint32_t var, bool value) {
    stack_.push_back({rows_, pivots_, feasible_});
    Propagation result;
    if (!feasible_) {
      result.conflict = true;
      return result;
    }

    std::size_t owner = rows_.size();
    for (std::size_t r = 0; r < rows_.size(); ++r) {
      if (!rows_[r].get(var)) continue;
      rows_[r].set(var, false);
      if (value) rows_[r].flip(n_);
      if (pivots_[r] == var) owner = r;
    }

    if (owner != rows_.size()) {
      // The row that had `var` as its pivot lost its leading bit. Reduce it
      // against the remaining pivots and fold it back in (or detect 0 = 1).
      BitVec row = std::move(rows_[owner]);
      rows_.erase(rows_.begin() + static_cast<std::ptrdiff_t>(owner));
      pivots_.erase(pivots_.begin() + static_cast<std::ptrdiff_t>(owner));
      for (std::size_t k = 0; k < pivots_.size(); ++k) {
        if (row.get(pivots_[k])) row ^= rows_[k];
      }
      const int lead = row.lowest_set_below(n_);
      if (lead < 0) {
        if (row.get(n_)) {
          feasible_ = false;
          result.conflict = true;
          return result;
        }
      } else {
        const std::size_t at = pivot_index(static_cast<std::size_t>(lead));
        for (std::size_t r = 0; r < rows_.size(); ++r) {
          if (rows_[r].get(static_cast<std::size_t>(lead))) rows_[r] ^= row;
        }
        rows_.insert(rows_.begin() + static_cast<std::ptrdiff_t>(at), std::move(row));
        pivots_.insert(pivots_.begin() + static_cast<std::ptrdiff_t>(at),
                       static_cast<std::uint32_t>(lead));
      }
    }

    detail::collect_units(n_, rows_, result.forced);
    return result;
  }

  void pop() {
    if (stack_.empty()) throw std::logic_error("ParityPropagator::pop on empty stack");
    rows_ = std::move(stack_.back().rows);
    pivots_ = std::move(stack_.back().pivots);
    feasible_ = stack_.back().feasible;
    stack_.pop_back();
  }

  // Current state as a reduced system.
  ReducedParitySystem snapshot() const {
    ReducedParitySystem red;
    red.n = n_;
    red.feasible = feasible_;
    if (feasible_) {
      red.rows = rows_;
      red.pivots = pivots_;
    }
    return red;
  }

 private:
  struct Snapshot {
    std::vector<BitVec> rows;
    std::vector<std::uint32_t> pivots;
    bool feasible;
  };

  // First index whose pivot column is >= col.
  std::size_t pivot_index(std::size_t col) const {
    std::size_t lo = 0;
    std::size_t hi = pivots_.size();
    while (lo < hi) {
      const std::size_t mid = (lo + hi) / 2;
      if (pivots_[mid] < col) {
        lo = mid + 1;
      } else {
        hi = mid;
      }
    }
    return lo;
  }

  std::size_t n_;
  std::vector<BitVec> rows_;
  std::vector<std::uint32_t> pivots_;
  bool feasible_;
  std::vector<Snapshot> stack_;
};

}  // namespace wish
