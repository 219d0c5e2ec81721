#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "wish/bitvec.hpp"
#include "wish/logspace.hpp"

namespace wish {

class ModelError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// One potential over an ordered subset of variables. The table is flat,
// row-major in scope order (the last scope variable varies fastest, as in
// the UAI interchange format), and holds natural-log values; -inf encodes
// a zero potential entry.
struct Factor {
  std::vector<std::uint32_t> scope;
  std::vector<double> log_table;
};

// A discrete factor graph: per-variable cardinalities plus factors.
struct FactorGraph {
  std::vector<std::uint32_t> cardinalities;
  std::vector<Factor> factors;

  std::size_t num_variables() const { return cardinalities.size(); }
};

inline std::size_t table_size(const FactorGraph& g, const std::vector<std::uint32_t>& scope) {
  std::size_t sz = 1;
  for (std::uint32_t v : scope) sz *= g.cardinalities[v];
  return sz;
}

// Checks the structural invariants; throws ModelError on the first violation.
inline void validate(const FactorGraph& g) {
  for (std::uint32_t card : g.cardinalities) {
    if (card < 1) throw ModelError("variable cardinality must be >= 1");
  }
  for (std::size_t f = 0; f < g.factors.size(); ++f) {
    const Factor& fac = g.factors[f];
    std::vector<bool> seen(g.num_variables(), false);
    for (std::uint32_t v : fac.scope) {
      if (v >= g.num_variables())
        throw ModelError("factor " + std::to_string(f) + ": scope index out of range");
      if (seen[v])
        throw ModelError("factor " + std::to_string(f) + ": duplicate variable in scope");
      seen[v] = true;
    }
    if (fac.log_table.size() != table_size(g, fac.scope))
      throw ModelError("factor " + std::to_string(f) + ": table length mismatch");
    for (double e : fac.log_table) {
      if (std::isnan(e) || (std::isinf(e) && e > 0.0))
        throw ModelError("factor " + std::to_string(f) + ": table entry must be in [-inf, +inf)");
    }
  }
}

// Where one original variable landed in the binary encoding: `bit_count`
// consecutive bits starting at `first_bit`, read most-significant-first.
// Codes 0..cardinality-1 are the original values in order; higher codes are
// dead and carry weight zero.
struct VariableEncoding {
  std::uint32_t first_bit = 0;
  std::uint32_t bit_count = 0;
  std::uint32_t cardinality = 0;
};

// A factor graph whose variables are all binary, together with the map back
// to the multi-valued original. This is the form the hashing and
// optimization layers operate on.
struct BinaryModel {
  FactorGraph graph;
  std::size_t n = 0;  // number of bits
  std::vector<VariableEncoding> encoding;
};

namespace detail {

inline std::uint32_t bits_for_cardinality(std::uint32_t card) {
  std::uint32_t bits = 0;
  while ((std::uint64_t{1} << bits) < card) ++bits;
  return bits;
}

template <typename GetBit>
inline double log_weight_impl(const BinaryModel& m, GetBit&& bit) {
  // Left-to-right accumulation in factor order. Keeping the order canonical
  // makes the value bit-identical wherever the same configuration is scored.
  double total = 0.0;
  for (const Factor& f : m.graph.factors) {
    std::size_t idx = 0;
    for (std::uint32_t s : f.scope) idx = (idx << 1) | (bit(s) ? 1u : 0u);
    const double entry = f.log_table[idx];
    if (is_log_zero(entry)) return kLogZero;
    total += entry;
  }
  return total;
}

}  // namespace detail

// Log weight of one full bit assignment: the sum of the touched log-table
// entries, or -inf as soon as any factor vanishes.
inline double log_weight(const BinaryModel& m, const BitVec& x) {
  if (x.size() != m.n) throw std::invalid_argument("log_weight: assignment length mismatch");
  return detail::log_weight_impl(m, [&](std::uint32_t i) { return x.get(i); });
}

// Fast path for enumeration: the assignment packed into a single word.
inline double log_weight(const BinaryModel& m, std::uint64_t x) {
  return detail::log_weight_impl(m, [&](std::uint32_t i) { return (x >> i) & 1; });
}

// Encodes a multi-valued graph over {0,1}^n, ceil(log2 |X_i|) bits per
// variable. Bit patterns that decode to no original value ("dead codes")
// get weight zero, so the partition function is preserved exactly.
inline BinaryModel binarize(const FactorGraph& g) {
  validate(g);
  BinaryModel m;
  m.encoding.resize(g.num_variables());
  std::uint32_t next_bit = 0;
  for (std::size_t v = 0; v < g.num_variables(); ++v) {
    const std::uint32_t card = g.cardinalities[v];
    const std::uint32_t bits = detail::bits_for_cardinality(card);
    m.encoding[v] = {next_bit, bits, card};
    next_bit += bits;
  }
  m.n = next_bit;
  m.graph.cardinalities.assign(m.n, 2);

  for (const Factor& f : g.factors) {
    Factor bf;
    for (std::uint32_t v : f.scope) {
      const VariableEncoding& enc = m.encoding[v];
      for (std::uint32_t b = 0; b < enc.bit_count; ++b) bf.scope.push_back(enc.first_bit + b);
    }
    const std::size_t rows = std::size_t{1} << bf.scope.size();
    bf.log_table.resize(rows);
    for (std::size_t idx = 0; idx < rows; ++idx) {
      // Decode per-variable codes from the row index, most significant first.
      std::size_t rest = idx;
      std::size_t shift = bf.scope.size();
      bool dead = false;
      std::size_t orig_idx = 0;
      for (std::uint32_t v : f.scope) {
        const VariableEncoding& enc = m.encoding[v];
        shift -= enc.bit_count;
        const std::size_t code = (rest >> shift) & ((std::size_t{1} << enc.bit_count) - 1);
        if (code >= enc.cardinality) {
          dead = true;
          break;
        }
        orig_idx = orig_idx * enc.cardinality + code;
      }
      bf.log_table[idx] = dead ? kLogZero : f.log_table[orig_idx];
    }
    m.graph.factors.push_back(std::move(bf));
  }

  // A variable whose cardinality is not a power of two needs its dead codes
  // killed even when no factor touches it.
  for (std::size_t v = 0; v < g.num_variables(); ++v) {
    const VariableEncoding& enc = m.encoding[v];
    const std::size_t codes = std::size_t{1} << enc.bit_count;
    if (codes == enc.cardinality) continue;
    Factor guard;
    for (std::uint32_t b = 0; b < enc.bit_count; ++b) guard.scope.push_back(enc.first_bit + b);
    guard.log_table.resize(codes);
    for (std::size_t code = 0; code < codes; ++code) {
      guard.log_table[code] = (code < enc.cardinality) ? 0.0 : kLogZero;
    }
    m.graph.factors.push_back(std::move(guard));
  }
  return m;
}

// Decodes the value of original variable `v` under assignment `x`, or -1
// for a dead code.
inline std::int64_t decode_value(const BinaryModel& m, const BitVec& x, std::size_t v) {
  const VariableEncoding& enc = m.encoding[v];
  std::size_t code = 0;
  for (std::uint32_t b = 0; b < enc.bit_count; ++b) {
    code = (code << 1) | (x.get(enc.first_bit + b) ? 1u : 0u);
  }
  return code < enc.cardinality ? static_cast<std::int64_t>(code) : -1;
}

// Product construction: `copies` independent relabeled copies of the model
// side by side. Its partition function is the original's raised to `copies`.
inline BinaryModel power_model(const BinaryModel& m, std::uint32_t copies) {
  if (copies < 1) throw std::invalid_argument("power_model: need at least one copy");
  BinaryModel p;
  p.n = m.n * copies;
  p.graph.cardinalities.assign(p.n, 2);
  p.graph.factors.reserve(m.graph.factors.size() * copies);
  p.encoding.reserve(m.encoding.size() * copies);
  for (std::uint32_t c = 0; c < copies; ++c) {
    const std::uint32_t shift = static_cast<std::uint32_t>(m.n) * c;
    for (const Factor& f : m.graph.factors) {
      Factor g = f;
      for (std::uint32_t& v : g.scope) v += shift;
      p.graph.factors.push_back(std::move(g));
    }
    for (const VariableEncoding& enc : m.encoding) {
      p.encoding.push_back({enc.first_bit + shift, enc.bit_count, enc.cardinality});
    }
  }
  return p;
}

}  // namespace wish
