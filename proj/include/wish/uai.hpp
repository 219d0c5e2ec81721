#pragma once

#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <system_error>
#include <vector>

#include "wish/model.hpp"

namespace wish {

class UaiError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace detail {

// Whitespace-delimited token reader that remembers the line each token
// started on, so parse errors can point at the offending input.
class TokenReader {
 public:
  explicit TokenReader(std::istream& in) : in_(in) {}

  bool next(std::string& tok) {
    tok.clear();
    int c;
    while ((c = in_.get()) != EOF) {
      if (c == '\n') ++line_;
      if (!std::isspace(static_cast<unsigned char>(c))) break;
    }
    if (c == EOF) return false;
    token_line_ = line_;
    do {
      tok.push_back(static_cast<char>(c));
      c = in_.get();
    } while (c != EOF && !std::isspace(static_cast<unsigned char>(c)));
    if (c == '\n') ++line_;
    return true;
  }

  std::size_t token_line() const { return token_line_; }
  std::size_t line() const { return line_; }

 private:
  std::istream& in_;
  std::size_t line_ = 1;
  std::size_t token_line_ = 1;
};

[[noreturn]] inline void uai_fail(std::size_t line, const std::string& what) {
  throw UaiError("uai parse error at line " + std::to_string(line) + ": " + what);
}

inline std::uint64_t expect_uint(TokenReader& r, const char* what) {
  std::string tok;
  if (!r.next(tok)) uai_fail(r.line(), std::string("unexpected end of input, expected ") + what);
  std::uint64_t value = 0;
  auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), value);
  if (ec != std::errc{} || ptr != tok.data() + tok.size())
    uai_fail(r.token_line(), std::string("expected ") + what + ", got '" + tok + "'");
  return value;
}

inline double expect_double(TokenReader& r, const char* what) {
  std::string tok;
  if (!r.next(tok)) uai_fail(r.line(), std::string("unexpected end of input, expected ") + what);
  char* end = nullptr;
  const double value = std::strtod(tok.c_str(), &end);
  if (end != tok.c_str() + tok.size())
    uai_fail(r.token_line(), std::string("expected ") + what + ", got '" + tok + "'");
  return value;
}

}  // namespace detail

// Reads a model in the UAI MARKOV interchange format. Potentials in the
// file are linear-scale; they are stored as natural logs, with 0 mapping
// to -inf. Tables are row-major with the last scope variable fastest.
inline FactorGraph parse_uai(std::istream& in) {
  detail::TokenReader r(in);
  std::string tok;
  if (!r.next(tok)) detail::uai_fail(r.line(), "empty input");
  if (tok != "MARKOV") detail::uai_fail(r.token_line(), "expected MARKOV header, got '" + tok + "'");

  FactorGraph g;
  const std::uint64_t num_vars = detail::expect_uint(r, "variable count");
  g.cardinalities.resize(num_vars);
  for (std::uint64_t v = 0; v < num_vars; ++v) {
    const std::uint64_t card = detail::expect_uint(r, "variable cardinality");
    if (card < 1) detail::uai_fail(r.token_line(), "variable cardinality must be >= 1");
    g.cardinalities[v] = static_cast<std::uint32_t>(card);
  }

  const std::uint64_t num_factors = detail::expect_uint(r, "factor count");
  g.factors.resize(num_factors);
  for (std::uint64_t f = 0; f < num_factors; ++f) {
    const std::uint64_t arity = detail::expect_uint(r, "factor scope size");
    g.factors[f].scope.resize(arity);
    for (std::uint64_t k = 0; k < arity; ++k) {
      const std::uint64_t v = detail::expect_uint(r, "scope variable index");
      if (v >= num_vars) detail::uai_fail(r.token_line(), "scope variable index out of range");
      g.factors[f].scope[k] = static_cast<std::uint32_t>(v);
    }
  }

  for (std::uint64_t f = 0; f < num_factors; ++f) {
    const std::uint64_t entries = detail::expect_uint(r, "factor table size");
    const std::size_t expected = table_size(g, g.factors[f].scope);
    if (entries != expected)
      detail::uai_fail(r.token_line(), "factor " + std::to_string(f) + " table size " +
                                           std::to_string(entries) + " does not match scope (expected " +
                                           std::to_string(expected) + ")");
    g.factors[f].log_table.resize(entries);
    for (std::uint64_t k = 0; k < entries; ++k) {
      const double value = detail::expect_double(r, "potential value");
      if (std::isnan(value)) detail::uai_fail(r.token_line(), "potential value is NaN");
      if (value < 0.0) detail::uai_fail(r.token_line(), "negative potential");
      g.factors[f].log_table[k] = value == 0.0 ? kLogZero : std::log(value);
    }
  }

  if (r.next(tok)) detail::uai_fail(r.token_line(), "trailing content '" + tok + "'");
  validate(g);
  return g;
}

inline FactorGraph parse_uai(const std::string& text) {
  std::istringstream in(text);
  return parse_uai(in);
}

namespace detail {

inline void write_double(std::ostream& out, double value) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  (void)ec;
  out.write(buf, ptr - buf);
}

}  // namespace detail

// Writes the linear-scale UAI MARKOV form of the graph. Values use the
// shortest round-trip decimal representation.
inline void write_uai(std::ostream& out, const FactorGraph& g) {
  out << "MARKOV\n" << g.num_variables() << '\n';
  for (std::size_t v = 0; v < g.num_variables(); ++v) {
    if (v) out << ' ';
    out << g.cardinalities[v];
  }
  out << '\n' << g.factors.size() << '\n';
  for (const Factor& f : g.factors) {
    out << f.scope.size();
    for (std::uint32_t v : f.scope) out << ' ' << v;
    out << '\n';
  }
  for (const Factor& f : g.factors) {
    out << '\n' << f.log_table.size() << '\n';
    for (std::size_t k = 0; k < f.log_table.size(); ++k) {
      if (k) out << ' ';
      detail::write_double(out, is_log_zero(f.log_table[k]) ? 0.0 : std::exp(f.log_table[k]));
    }
    out << '\n';
  }
}

inline std::string write_uai(const FactorGraph& g) {
  std::ostringstream out;
  write_uai(out, g);
  return out.str();
}

}  // namespace wish
