#include <cmath>
#include <set>
#include <vector>

#include "doctest.h"
#include "wish/bitvec.hpp"
#include "wish/logspace.hpp"
#include "wish/rng.hpp"

using namespace wish;

TEST_CASE("log_add basic identities") {
  CHECK(log_add(kLogZero, kLogZero) == kLogZero);
  CHECK(log_add(kLogZero, 1.5) == 1.5);
  CHECK(log_add(1.5, kLogZero) == 1.5);
  CHECK(log_add(std::log(2.0), std::log(3.0)) == doctest::Approx(std::log(5.0)).epsilon(1e-12));
  CHECK(log_add(0.0, 0.0) == doctest::Approx(std::log(2.0)).epsilon(1e-12));
}

TEST_CASE("log_sum_exp drops -inf terms and handles extremes") {
  std::vector<double> xs{kLogZero, kLogZero, kLogZero};
  CHECK(log_sum_exp(xs) == kLogZero);
  CHECK(log_sum_exp(std::vector<double>{}) == kLogZero);

  std::vector<double> mixed{std::log(4.0), kLogZero, std::log(6.0)};
  CHECK(log_sum_exp(mixed) == doctest::Approx(std::log(10.0)).epsilon(1e-12));

  // Values far enough apart that naive exponentiation would overflow.
  std::vector<double> wide{1000.0, 0.0};
  CHECK(log_sum_exp(wide) == doctest::Approx(1000.0).epsilon(1e-12));

  std::vector<double> single{-2.5};
  CHECK(log_sum_exp(single) == doctest::Approx(-2.5).epsilon(1e-15));
}

TEST_CASE("BitVec get/set/flip and word boundaries") {
  BitVec v(130);
  CHECK(v.size() == 130);
  CHECK(v.none());
  v.set(0, true);
  v.set(63, true);
  v.set(64, true);
  v.set(129, true);
  CHECK(v.count() == 4);
  CHECK(v.get(63));
  CHECK(v.get(64));
  CHECK_FALSE(v.get(65));
  v.flip(64);
  CHECK_FALSE(v.get(64));
  CHECK(v.count() == 3);
}

TEST_CASE("BitVec xor and and_parity") {
  BitVec a = BitVec::from_u64(8, 0b10110100);
  BitVec b = BitVec::from_u64(8, 0b11010110);
  BitVec c = a;
  c ^= b;
  CHECK(c == BitVec::from_u64(8, 0b10110100 ^ 0b11010110));
  // popcount(a & b) = popcount(0b10010100) = 3, odd.
  CHECK(a.and_parity(b));
  CHECK(a.and_parity(a) == ((a.count() & 1) == 1));
}

TEST_CASE("BitVec lowest_set_below and count_below") {
  BitVec v(70);
  CHECK(v.lowest_set_below(70) == -1);
  v.set(69, true);
  CHECK(v.lowest_set_below(69) == -1);
  CHECK(v.lowest_set_below(70) == 69);
  CHECK(v.count_below(69) == 0);
  CHECK(v.count_below(70) == 1);
  v.set(3, true);
  CHECK(v.lowest_set_below(70) == 3);
  CHECK(v.count_below(4) == 1);
}

TEST_CASE("BitVec u64 round trip and to_string") {
  BitVec v = BitVec::from_u64(6, 0b101101);
  CHECK(v.to_u64() == 0b101101);
  CHECK(v.to_string() == "101101");  // bit 0 first
  BitVec big(65);
  CHECK_THROWS_AS((void)big.to_u64(), std::length_error);
}

TEST_CASE("derive_seed is deterministic and spreads over (i, t)") {
  CHECK(derive_seed(7, 1, 2) == derive_seed(7, 1, 2));
  std::set<std::uint64_t> seeds;
  for (std::uint64_t i = 0; i < 20; ++i) {
    for (std::uint64_t t = 0; t < 60; ++t) seeds.insert(derive_seed(42, i, t));
  }
  CHECK(seeds.size() == 20 * 60);
  CHECK(derive_seed(1, 2, 3) != derive_seed(2, 2, 3));
}

TEST_CASE("uniform draws stay in range and reproduce") {
  Rng a(99);
  Rng b(99);
  for (int k = 0; k < 1000; ++k) {
    const double u = uniform_unit(a);
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
    CHECK(u == uniform_unit(b));
  }
  Rng c(5);
  for (int k = 0; k < 100; ++k) {
    const double x = uniform_in(c, -2.0, 3.0);
    CHECK(x >= -2.0);
    CHECK(x <= 3.0);
  }
}
