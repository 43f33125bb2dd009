#pragma once

#include <cstdint>
#include <vector>

#include "wfa/automata.hpp"

namespace wfa {

struct EmConfig {
  int n_states = 1;
  int max_iter = 200;
  double rel_tol = 1e-6;
  std::uint64_t seed = 0;

  void validate() const;
};

struct EmFit {
  Pnfa model;
  /// Log-likelihood of the sample before each M-step, then of the final
  /// model; non-decreasing.
  std::vector<double> log_likelihood_trace;
  int iterations = 0;
  bool converged = false;
  /// States whose expected visit count vanished and were re-initialized uniform.
  int reset_states = 0;
};

/// sum_x log f_p(x) by the scaled forward recursion; -inf if any string has
/// probability zero.
double log_likelihood(const Pnfa& p, const StringSample& sample);

/// Expected sufficient statistics of one E-step.
struct EmCounts {
  Vector initial;             // n
  std::vector<Matrix> trans;  // m x (n x n)
  Vector stop;                // n
  double log_likelihood = 0.0;
  std::size_t zero_probability = 0;

  EmCounts(int n, int m);
  EmCounts& operator+=(const EmCounts& other);
};

/// Distinct strings with multiplicities, in shortlex order.
struct WeightedStrings {
  std::vector<Word> strings;
  std::vector<double> weights;
};

WeightedStrings compress(const StringSample& sample);

/// Forward-backward expected counts. Accumulates in fixed-size chunks that are
/// reduced in chunk order, so the result does not depend on the thread count.
EmCounts expected_counts(const Pnfa& p, const WeightedStrings& data);

struct MStep {
  Pnfa model;
  int reset_states = 0;
};

/// Normalizes counts per state. Rows with no expected visits become uniform
/// over the m n + 1 outcomes.
MStep maximize(const EmCounts& counts);

/// Baum-Welch over the stop-augmented outcome space.
EmFit em_fit(const StringSample& sample, const EmConfig& config);

namespace serial {
/// Single-pass reference for expected_counts.
EmCounts expected_counts(const Pnfa& p, const WeightedStrings& data);
}  // namespace serial

}  // namespace wfa
