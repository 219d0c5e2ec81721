#include <cmath>
#include <cstdint>
#include <vector>

#include "doctest.h"
#include "oracles.hpp"
#include "wish/oracle.hpp"

using namespace wish;

namespace {

// Single factor over all bits whose table is the given linear weights.
BinaryModel weights_model(const std::vector<double>& weights) {
  std::size_t n = 0;
  while ((std::size_t{1} << n) < weights.size()) ++n;
  REQUIRE((std::size_t{1} << n) == weights.size());
  FactorGraph g;
  g.cardinalities.assign(n, 2);
  Factor f;
  for (std::size_t v = 0; v < n; ++v) f.scope.push_back(static_cast<std::uint32_t>(v));
  for (double w : weights) f.log_table.push_back(w == 0.0 ? kLogZero : std::log(w));
  g.factors.push_back(std::move(f));
  return binarize(g);
}

BinaryModel uniform_model(std::size_t n) {
  FactorGraph g;
  g.cardinalities.assign(n, 2);
  return binarize(g);
}

BinaryModel random_model(Rng& rng, std::uint32_t max_bits) {
  if (rng() & 1) return binarize(testref::random_generated(rng, max_bits));
  return binarize(testref::random_multivalued(rng, 5, max_bits));
}

}  // namespace

TEST_CASE("brute_force_log_z sums the table") {
  CHECK(brute_force_log_z(weights_model({1, 2, 3, 4})) ==
        doctest::Approx(std::log(10.0)).epsilon(1e-12));
  CHECK(brute_force_log_z(uniform_model(5)) == doctest::Approx(5 * std::log(2.0)).epsilon(1e-12));
  CHECK(is_log_zero(brute_force_log_z(weights_model({0, 0}))));

  FactorGraph wide;
  wide.cardinalities.assign(30, 2);
  CHECK_THROWS_AS((void)brute_force_log_z(binarize(wide)), std::invalid_argument);
}

TEST_CASE("two independent partition oracles agree") {
  Rng rng(120120);
  for (int iter = 0; iter < 30; ++iter) {
    const BinaryModel m = random_model(rng, 10);
    const double a = brute_force_log_z(m);
    const double b = testref::binary_log_z(m);
    CHECK(testref::log_close(a, b, 1e-12));
    const QuantileProfile profile = brute_force_quantiles(m);
    CHECK(testref::log_close(log_z_from_profile(profile), a, 1e-12));
  }
}

TEST_CASE("quantile profile picks the 2^i-th heaviest weight") {
  const QuantileProfile p = brute_force_quantiles(weights_model({4, 2, 1, 1}));
  REQUIRE(p.n == 2);
  REQUIRE(p.sorted_log_weights.size() == 4);
  CHECK(p.sorted_log_weights[0] == std::log(4.0));
  CHECK(p.sorted_log_weights[1] == std::log(2.0));
  REQUIRE(p.b.size() == 3);
  CHECK(p.b[0] == std::log(4.0));
  CHECK(p.b[1] == std::log(2.0));
  CHECK(p.b[2] == std::log(1.0));

  const QuantileProfile u = brute_force_quantiles(uniform_model(3));
  for (double b : u.b) CHECK(b == 0.0);

  Rng rng(31337);
  for (int iter = 0; iter < 20; ++iter) {
    const BinaryModel m = random_model(rng, 9);
    const QuantileProfile q = brute_force_quantiles(m);
    REQUIRE(q.sorted_log_weights.size() == (std::size_t{1} << m.n));
    for (std::size_t k = 1; k < q.sorted_log_weights.size(); ++k) {
      CHECK(q.sorted_log_weights[k - 1] >= q.sorted_log_weights[k]);
    }
    REQUIRE(q.b.size() == m.n + 1);
    for (std::size_t i = 0; i <= m.n; ++i) {
      CHECK(q.b[i] == q.sorted_log_weights[(std::size_t{1} << i) - 1]);
    }
  }
}

TEST_CASE("tail count matches the profile and is monotone") {
  const BinaryModel m = weights_model({4, 2, 1, 1});
  CHECK(brute_force_tail(m, 0.5) == 4);
  CHECK(brute_force_tail(m, 1.0) == 4);
  CHECK(brute_force_tail(m, 2.0) == 2);
  CHECK(brute_force_tail(m, 3.0) == 1);
  CHECK(brute_force_tail(m, 4.0) == 1);
  CHECK(brute_force_tail(m, 4.5) == 0);
  CHECK_THROWS_AS((void)brute_force_tail(m, 0.0), std::invalid_argument);
  CHECK_THROWS_AS((void)brute_force_tail(m, -1.0), std::invalid_argument);

  Rng rng(8181);
  for (int iter = 0; iter < 15; ++iter) {
    const BinaryModel r = random_model(rng, 9);
    const QuantileProfile q = brute_force_quantiles(r);
    std::uint64_t prev = std::uint64_t{1} << r.n;
    for (double u = 0.25; u < 64.0; u *= 2.0) {
      const std::uint64_t g = brute_force_tail(r, u);
      CHECK(g <= prev);
      prev = g;
      std::uint64_t from_profile = 0;
      for (double w : q.sorted_log_weights) {
        if (w >= std::log(u)) ++from_profile;
      }
      CHECK(g == from_profile);
    }
  }
}

TEST_CASE("envelope collapses to Z on a uniform model") {
  const EnvelopeCheck check = check_quantile_envelope(brute_force_quantiles(uniform_model(4)), 2);
  CHECK(check.log_lower == doctest::Approx(check.log_upper).epsilon(1e-12));
  CHECK(check.log_z == doctest::Approx(4 * std::log(2.0)).epsilon(1e-12));
  CHECK(check.bounds_z);
  CHECK(check.within_factor);
  CHECK(check.pass);
}

TEST_CASE("envelope holds on random models for c in {1,2,3}") {
  Rng rng(424242);
  constexpr double kLn2 = 0.6931471805599453;
  for (int iter = 0; iter < 30; ++iter) {
    const BinaryModel m = random_model(rng, 10);
    const QuantileProfile q = brute_force_quantiles(m);
    for (std::uint32_t c = 1; c <= 3; ++c) {
      const EnvelopeCheck check = check_quantile_envelope(q, c);
      CHECK(check.bounds_z);
      CHECK(check.within_factor);
      CHECK(check.pass);
      CHECK(check.log_upper <= check.log_lower + 2.0 * c * kLn2 + 1e-9);
    }

    // The one-step sandwich: L <= Z <= U with U <= 2L.
    std::vector<double> lower_terms{q.b[0]};
    std::vector<double> upper_terms{q.b[0]};
    for (std::size_t i = 0; i < m.n; ++i) {
      lower_terms.push_back(q.b[i + 1] + static_cast<double>(i) * kLn2);
      upper_terms.push_back(q.b[i] + static_cast<double>(i) * kLn2);
    }
    const double log_l = log_sum_exp(lower_terms);
    const double log_u = log_sum_exp(upper_terms);
    const double log_z = log_z_from_profile(q);
    CHECK(log_l <= log_z + 1e-9);
    CHECK(log_z <= log_u + 1e-9);
    CHECK(log_u <= log_l + kLn2 + 1e-9);

    // The envelope brackets the sandwich from outside.
    const EnvelopeCheck two = check_quantile_envelope(q, 2);
    CHECK(two.log_lower <= log_l + 1e-9);
    CHECK(log_u <= two.log_upper + 1e-9);
  }

  CHECK_THROWS_AS((void)check_quantile_envelope(QuantileProfile{}, 0), std::invalid_argument);
}
