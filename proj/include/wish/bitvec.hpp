#pragma once

#include <bit>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace wish {

// Fixed-length bit vector packed into 64-bit words. Bit i lives in
// word i/64 at position i%64.
class BitVec {
 public:
  BitVec() = default;
  explicit BitVec(std::size_t n) : size_(n), words_((n + 63) / 64, 0) {}

  static BitVec from_u64(std::size_t n, std::uint64_t bits) {
    BitVec v(n);
    if (n > 0) {
      v.words_[0] = (n >= 64) ? bits : (bits & ((std::uint64_t{1} << n) - 1));
    }
    return v;
  }

  std::size_t size() const { return size_; }

  bool get(std::size_t i) const {
    return (words_[i >> 6] >> (i & 63)) & 1;
  }

  void set(std::size_t i, bool v) {
    const std::uint64_t mask = std::uint64_t{1} << (i & 63);
    if (v) {
      words_[i >> 6] |= mask;
    } else {
      words_[i >> 6] &= ~mask;
    }
  }

  void flip(std::size_t i) { words_[i >> 6] ^= std::uint64_t{1} << (i & 63); }

  BitVec& operator^=(const BitVec& o) {
    for (std::size_t w = 0; w < words_.size(); ++w) words_[w] ^= o.words_[w];
    return *this;
  }

  // Parity of the AND with another vector of the same length.
  bool and_parity(const BitVec& o) const {
    std::uint64_t acc = 0;
    for (std::size_t w = 0; w < words_.size(); ++w) acc ^= words_[w] & o.words_[w];
    return std::popcount(acc) & 1;
  }

  std::size_t count() const {
    std::size_t c = 0;
    for (std::uint64_t w : words_) c += std::popcount(w);
    return c;
  }

  // Number of set bits below `limit`.
  std::size_t count_below(std::size_t limit) const {
    std::size_t c = 0;
    for (std::size_t w = 0; w * 64 < limit; ++w) {
      std::uint64_t x = words_[w];
      if (w == (limit - 1) / 64 && (limit & 63)) {
        x &= (std::uint64_t{1} << (limit & 63)) - 1;
      }
      c += std::popcount(x);
    }
    return c;
  }

  bool none() const {
    for (std::uint64_t w : words_) {
      if (w) return false;
    }
    return true;
  }

  bool any() const { return !none(); }

  // Index of the lowest set bit below `limit`, or -1.
  int lowest_set_below(std::size_t limit) const {
    for (std::size_t w = 0; w * 64 < limit; ++w) {
      std::uint64_t x = words_[w];
      if (w == (limit - 1) / 64 && (limit & 63)) {
        x &= (std::uint64_t{1} << (limit & 63)) - 1;
      }
      if (x) {
        return static_cast<int>(w * 64 + std::countr_zero(x));
      }
    }
    return -1;
  }

  int lowest_set() const { return size_ ? lowest_set_below(size_) : -1; }

  std::uint64_t to_u64() const {
    if (size_ > 64) throw std::length_error("BitVec::to_u64: more than 64 bits");
    return words_.empty() ? 0 : words_[0];
  }

  std::string to_string() const {
    std::string s;
    s.reserve(size_);
    for (std::size_t i = 0; i < size_; ++i) s.push_back(get(i) ? '1' : '0');
    return s;
  }

  friend bool operator==(const BitVec&, const BitVec&) = default;

 private:
  std::size_t size_ = 0;
  std::vector<std::uint64_t> words_;
};

}  // namespace wish
