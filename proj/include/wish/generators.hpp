#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "wish/model.hpp"
#include "wish/rng.hpp"

namespace wish {

// Ising model on the complete graph: disagreement between i and j costs
// exp(-w_ij) with w_ij ~ U[0, w*sqrt(j-i)], and a closed chain
// 0-1-...-(n-1)-0 of repulsive couplings ~ U[-chain_strength, 0] is overlaid
// on top. Chain and clique couplings on a shared edge multiply, so each
// unordered pair contributes exactly one factor. Draw order is fixed: all
// pairs i<j lexicographically, then the chain edges in cycle order (for
// n = 2 the cycle degenerates to the single edge, drawn once).
inline FactorGraph generate_clique_ising(std::uint32_t n, double w, double chain_strength,
                                         std::uint64_t seed) {
  if (n < 2) throw std::invalid_argument("generate_clique_ising: need n >= 2");
  Rng rng(seed);
  std::vector<std::vector<double>> coupling(n, std::vector<double>(n, 0.0));
  for (std::uint32_t i = 0; i < n; ++i) {
    for (std::uint32_t j = i + 1; j < n; ++j) {
      coupling[i][j] = uniform_in(rng, 0.0, w * std::sqrt(static_cast<double>(j - i)));
    }
  }
  const std::uint32_t chain_edges = (n == 2) ? 1 : n;
  for (std::uint32_t e = 0; e < chain_edges; ++e) {
    const std::uint32_t a = e;
    const std::uint32_t b = (e + 1) % n;
    const std::uint32_t i = a < b ? a : b;
    const std::uint32_t j = a < b ? b : a;
    coupling[i][j] += uniform_in(rng, -chain_strength, 0.0);
  }

  FactorGraph g;
  g.cardinalities.assign(n, 2);
  for (std::uint32_t i = 0; i < n; ++i) {
    for (std::uint32_t j = i + 1; j < n; ++j) {
      Factor f;
      f.scope = {i, j};
      const double cost = -coupling[i][j];
      f.log_table = {0.0, cost, cost, 0.0};
      g.factors.push_back(std::move(f));
    }
  }
  return g;
}

enum class GridMode { kAttractive, kMixed };

// Ising model on a rows x cols lattice with spins in {-1, +1} (binary value
// 0 maps to -1, 1 to +1). Pairwise factors exp(w_ij x_i x_j) on grid edges,
// unary fields exp(f_i x_i) on every site. Draw and emission order is fixed:
// sites row-major, each contributing its right edge then its down edge, then
// a row-major field pass. Field factors are always emitted.
inline FactorGraph generate_grid_ising(std::uint32_t rows, std::uint32_t cols, double w, double f,
                                       GridMode mode, std::uint64_t seed) {
  if (rows < 1 || cols < 1) throw std::invalid_argument("generate_grid_ising: need rows*cols >= 1");
  Rng rng(seed);
  FactorGraph g;
  g.cardinalities.assign(static_cast<std::size_t>(rows) * cols, 2);

  auto site = [cols](std::uint32_t r, std::uint32_t c) { return r * cols + c; };
  auto draw_coupling = [&]() {
    return mode == GridMode::kAttractive ? uniform_in(rng, 0.0, w) : uniform_in(rng, -w, w);
  };
  auto add_edge = [&](std::uint32_t u, std::uint32_t v) {
    const double wij = draw_coupling();
    Factor fac;
    fac.scope = {u, v};
    // Row-major over (x_u, x_v) with spin(0) = -1, spin(1) = +1.
    fac.log_table = {wij, -wij, -wij, wij};
    g.factors.push_back(std::move(fac));
  };

  for (std::uint32_t r = 0; r < rows; ++r) {
    for (std::uint32_t c = 0; c < cols; ++c) {
      if (c + 1 < cols) add_edge(site(r, c), site(r, c + 1));
      if (r + 1 < rows) add_edge(site(r, c), site(r + 1, c));
    }
  }
  for (std::uint32_t r = 0; r < rows; ++r) {
    for (std::uint32_t c = 0; c < cols; ++c) {
      const double fi = uniform_in(rng, -f, f);
      Factor fac;
      fac.scope = {site(r, c)};
      fac.log_table = {-fi, fi};
      g.factors.push_back(std::move(fac));
    }
  }
  return g;
}

}  // namespace wish
