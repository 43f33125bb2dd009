#pragma once

#include <cstddef>
#include <vector>

#include "wfa/types.hpp"

namespace wfa {

/// Finite alphabet {0, ..., size-1}.
class Alphabet {
 public:
  explicit Alphabet(int size);
  int size() const { return size_; }
  bool contains(Symbol a) const { return a >= 0 && a < size_; }

 private:
  int size_;
};

/// A = <alpha1^T, alpha_inf, {A_a}> computing f(x) = alpha1^T A_x1 ... A_xt alpha_inf.
/// Shapes and finiteness are checked on construction; instances are immutable.
class WeightedAutomaton {
 public:
  WeightedAutomaton(Vector alpha1, Vector alpha_inf, std::vector<Matrix> ops);

  /// The automaton computing the zero function.
  static WeightedAutomaton zero(int n_states, int alphabet_size);

  int n_states() const { return static_cast<int>(alpha1_.size()); }
  int alphabet_size() const { return static_cast<int>(ops_.size()); }

  const Vector& alpha1() const { return alpha1_; }
  const Vector& alpha_inf() const { return alpha_inf_; }
  const std::vector<Matrix>& ops() const { return ops_; }
  const Matrix& op(Symbol a) const { return ops_[static_cast<std::size_t>(a)]; }

  /// Sum over symbols of A_a.
  Matrix total_operator() const;

 private:
  Vector alpha1_;
  Vector alpha_inf_;
  std::vector<Matrix> ops_;
};

/// Probabilistic NFA with stopping mass. For every state i,
/// stop(i) + sum_a sum_j trans_a(i, j) = 1 and all parameters are nonnegative.
class Pnfa {
 public:
  static constexpr double kStochasticTol = 1e-12;

  Pnfa(Vector initial, std::vector<Matrix> trans, Vector stop);

  int n_states() const { return static_cast<int>(initial_.size()); }
  int alphabet_size() const { return static_cast<int>(trans_.size()); }

  const Vector& initial() const { return initial_; }
  const std::vector<Matrix>& trans() const { return trans_; }
  const Matrix& trans(Symbol a) const { return trans_[static_cast<std::size_t>(a)]; }
  const Vector& stop() const { return stop_; }

 private:
  Vector initial_;
  std::vector<Matrix> trans_;
  Vector stop_;
};

/// Training sample: a multiset of strings over an alphabet of the given size.
struct StringSample {
  int alphabet_size = 1;
  std::vector<Word> strings;

  std::size_t size() const { return strings.size(); }
  bool empty() const { return strings.empty(); }

  /// Throws InputError if a symbol falls outside the alphabet.
  void validate() const;

  /// The first `count` strings, preserving order.
  StringSample prefix(std::size_t count) const;
};

/// f_A(x), by left-to-right vector-matrix products.
double evaluate(const WeightedAutomaton& wa, const Word& x);

/// alpha1^T A_u as a row vector.
RowVector forward(const WeightedAutomaton& wa, const Word& u);

/// A_v alpha_inf.
Vector backward(const WeightedAutomaton& wa, const Word& v);

/// <alpha1^T M, M^-1 alpha_inf, {M^-1 A_a M}>. Rejects M whose condition
/// number exceeds 1e12.
WeightedAutomaton change_of_basis(const WeightedAutomaton& wa, const Matrix& m);

WeightedAutomaton pnfa_to_wa(const Pnfa& p);

/// Precomputed per-state outcome tables for repeated sampling.
class PnfaSampler {
 public:
  static constexpr std::size_t kMaxLength = 1'000'000;

  explicit PnfaSampler(const Pnfa& p);

  /// Draws one string. Throws NumericError past kMaxLength symbols.
  Word draw(Rng& rng) const;

 private:
  struct Outcome {
    double cumulative;
    Symbol symbol;  // -1 for stop
    int next;
  };
  std::vector<double> initial_cdf_;
  std::vector<std::vector<Outcome>> outcomes_;
};

Word sample_string(const Pnfa& p, Rng& rng);
StringSample sample_strings(const Pnfa& p, std::size_t count, Rng& rng);

/// Uniform double in [0, 1) from the top 53 bits of one engine draw.
double uniform01(Rng& rng);

/// Random target: initial ~ Dirichlet(c) over states; each state's outcome
/// vector over (symbol, next state) pairs plus stop ~ Dirichlet(c).
Pnfa random_pnfa(int n_states, int alphabet_size, Rng& rng, double concentration = 1.0);

/// Power-iteration estimate of the spectral radius, averaging the growth rate
/// over the second half of the iterations so transients cancel.
double spectral_radius_estimate(const Matrix& a, int iterations = 200);

/// Same state count; computes f(x Sigma*). Requires rho(sum_a A_a) < 1 - 1e-6.
WeightedAutomaton to_prefix_automaton(const WeightedAutomaton& wa);

/// Same state count; computes f(Sigma* x Sigma*), the expected number of
/// occurrences of x. Same precondition as the prefix transform.
WeightedAutomaton to_substring_automaton(const WeightedAutomaton& wa);

}  // namespace wfa
