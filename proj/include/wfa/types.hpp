#pragma once

#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace wfa {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using RowVector = Eigen::RowVectorXd;
using Index = Eigen::Index;

using Symbol = int;
using Word = std::vector<Symbol>;

/// All randomness in the library flows through an explicitly passed engine.
using Rng = std::mt19937_64;

/// Malformed arguments, shapes or files. The CLI maps this to exit code 2.
class InputError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Singular systems, divergent series, violated rank hypotheses. Exit code 3.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Non-fatal numerical diagnostics (degenerate factorizations and the like).
/// Written to stderr when enabled; always counted.
void warn(std::string_view message);
void set_warnings_enabled(bool enabled);
std::uint64_t warning_count();

/// Concatenation u·v.
Word concat(const Word& u, const Word& v);
/// Concatenation u·a·v.
Word concat(const Word& u, Symbol a, const Word& v);

/// Human-readable form used in diagnostics: "λ" or "0 1 2".
std::string to_string(const Word& w);

/// Shortlex order: by length, then lexicographically.
struct ShortLex {
  bool operator()(const Word& a, const Word& b) const {
    if (a.size() != b.size()) return a.size() < b.size();
    return a < b;
  }
};

}  // namespace wfa
