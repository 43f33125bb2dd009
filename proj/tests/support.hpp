#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

#include "wfa/automata.hpp"
#include "wfa/harness.hpp"
#include "wfa/hankel.hpp"

namespace wfa::testing {

// Every string of length <= max_len over {0..m-1}, shortlex.
inline std::vector<Word> all_words(int m, int max_len) {
  std::vector<Word> out{{}};
  std::size_t begin = 0;
  for (int len = 1; len <= max_len; ++len) {
    const std::size_t end = out.size();
    for (std::size_t i = begin; i < end; ++i) {
      for (int a = 0; a < m; ++a) {
        Word w = out[i];
        w.push_back(a);
        out.push_back(std::move(w));
      }
    }
    begin = end;
  }
  return out;
}

// Naive product alpha1^T A_x1 ... A_xt alpha_inf, written out independently
// of evaluate().
inline double naive_value(const WeightedAutomaton& wa, const Word& x) {
  Matrix prod = Matrix::Identity(wa.n_states(), wa.n_states());
  for (Symbol a : x) prod = prod * wa.op(a);
  return wa.alpha1().dot(prod * wa.alpha_inf());
}

inline double max_deviation(const WeightedAutomaton& a, const WeightedAutomaton& b, int max_len) {
  double worst = 0.0;
  for (const auto& w : all_words(a.alphabet_size(), max_len)) {
    worst = std::max(worst, std::abs(evaluate(a, w) - evaluate(b, w)));
  }
  return worst;
}

inline Word random_word(int m, int max_len, Rng& rng) {
  std::uniform_int_distribution<int> len(0, max_len);
  std::uniform_int_distribution<int> sym(0, m - 1);
  Word w(static_cast<std::size_t>(len(rng)));
  for (auto& a : w) a = sym(rng);
  return w;
}

inline Matrix random_matrix(Index rows, Index cols, Rng& rng, double scale = 1.0) {
  std::normal_distribution<double> g(0.0, scale);
  Matrix m(rows, cols);
  for (Index i = 0; i < rows; ++i)
    for (Index j = 0; j < cols; ++j) m(i, j) = g(rng);
  return m;
}

inline Pnfa geometric_pnfa() {
  Matrix t(1, 1);
  t << 0.5;
  return Pnfa(Vector::Ones(1), {t}, Vector::Constant(1, 0.5));
}

// A random Pnfa whose function has rank exactly n (rejection on the
// length-3 exact block).
inline Pnfa random_rank_target(int n, int m, Rng& rng, double concentration = 1.0) {
  for (;;) {
    Pnfa p = random_pnfa(n, m, rng, concentration);
    if (target_rank(pnfa_to_wa(p)) == n) return p;
  }
}

inline HankelBlocks random_blocks(Index p, Index s, int m, Rng& rng) {
  HankelBlocks b;
  b.H = random_matrix(p, s, rng);
  for (int a = 0; a < m; ++a) b.H_a.push_back(random_matrix(p, s, rng));
  return b;
}

}  // namespace wfa::testing
