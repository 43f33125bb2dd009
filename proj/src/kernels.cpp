// OpenMP kernels for Hankel block construction. Each output cell is written by
// exactly one iteration and counts are integers, so results do not depend on
// the thread count.

#include <algorithm>
#include <cstdint>

#include "wfa/hankel.hpp"

namespace wfa {

namespace {

/// Depth-capped trie over a sample, storing per-node word, prefix and
/// occurrence counts for whichever estimator it was built for.
class CountTrie {
 public:
  CountTrie(const StringSample& sample, EstimatorKind kind, std::size_t depth)
      : m_(sample.alphabet_size), depth_(depth) {
    new_node();
    if (kind == EstimatorKind::substring) {
      for (const auto& x : sample.strings) {
        for (std::size_t i = 0; i <= x.size(); ++i) insert(x, i, kind);
      }
    } else {
      for (const auto& x : sample.strings) insert(x, 0, kind);
    }
  }

  std::int64_t count(const Word& w) const {
    if (w.size() > depth_) return 0;
    std::int32_t node = 0;
    for (const Symbol a : w) {
      node = child_[static_cast<std::size_t>(node) * m_ + static_cast<std::size_t>(a)];
      if (node < 0) return 0;
    }
    return count_[static_cast<std::size_t>(node)];
  }

 private:
  std::int32_t new_node() {
    child_.resize(child_.size() + m_, -1);
    count_.push_back(0);
    return static_cast<std::int32_t>(count_.size() - 1);
  }

  void insert(const Word& x, std::size_t start, EstimatorKind kind) {
    std::int32_t node = 0;
    if (kind != EstimatorKind::word) ++count_[0];
    const std::size_t stop = std::min(x.size(), start + depth_);
    for (std::size_t i = start; i < stop; ++i) {
      const auto slot = static_cast<std::size_t>(node) * m_ + static_cast<std::size_t>(x[i]);
      if (child_[slot] < 0) {
        const auto fresh = new_node();
        child_[slot] = fresh;
      }
      node = child_[slot];
      if (kind != EstimatorKind::word) ++count_[static_cast<std::size_t>(node)];
    }
    if (kind == EstimatorKind::word && x.size() - start <= depth_) {
      ++count_[static_cast<std::size_t>(node)];
    }
  }

  std::size_t m_;
  std::size_t depth_;
  std::vector<std::int32_t> child_;
  std::vector<std::int64_t> count_;
};

}  // namespace

InducedFactors induced_factors(const WeightedAutomaton& wa, const Basis& basis) {
  const Index p = basis.n_prefixes();
  const Index s = basis.n_suffixes();
  const Index n = wa.n_states();
  InducedFactors f{Matrix(p, n), Matrix(n, s)};
#pragma omp parallel for schedule(static)
  for (Index i = 0; i < p; ++i) {
    f.P.row(i) = forward(wa, basis.prefixes()[static_cast<std::size_t>(i)]);
  }
#pragma omp parallel for schedule(static)
  for (Index j = 0; j < s; ++j) {
    f.S.col(j) = backward(wa, basis.suffixes()[static_cast<std::size_t>(j)]);
  }
  return f;
}

HankelBlocks exact_blocks(const WeightedAutomaton& wa, const Basis& basis) {
  const InducedFactors f = induced_factors(wa, basis);
  HankelBlocks out;
  out.H = f.P * f.S;
  out.H_a.resize(static_cast<std::size_t>(wa.alphabet_size()));
  const int m = wa.alphabet_size();
#pragma omp parallel for schedule(static)
  for (int a = 0; a < m; ++a) {
    out.H_a[static_cast<std::size_t>(a)] = f.P * wa.op(a) * f.S;
  }
  out.lambda_row = basis.lambda_row();
  out.lambda_col = basis.lambda_col();
  return out;
}

HankelBlocks empirical_blocks(const StringSample& sample, const Basis& basis, EstimatorKind kind) {
  if (sample.empty()) throw InputError("sample is empty");
  sample.validate();
  const CountTrie trie(sample, kind, basis.max_entry_length());
  const Index p = basis.n_prefixes();
  const Index s = basis.n_suffixes();
  const int m = sample.alphabet_size;
  const double n = static_cast<double>(sample.size());

  HankelBlocks out;
  out.H.resize(p, s);
  out.H_a.assign(static_cast<std::size_t>(m), Matrix(p, s));
  auto lookup = [&](const Word& w) {
    for (const Symbol a : w) {
      if (a < 0 || a >= m) return std::int64_t{0};
    }
    return trie.count(w);
  };
#pragma omp parallel for schedule(dynamic, 4)
  for (Index i = 0; i < p; ++i) {
    const auto& u = basis.prefixes()[static_cast<std::size_t>(i)];
    for (Index j = 0; j < s; ++j) {
      const auto& v = basis.suffixes()[static_cast<std::size_t>(j)];
      out.H(i, j) = static_cast<double>(lookup(concat(u, v))) / n;
      for (Symbol a = 0; a < m; ++a) {
        out.H_a[static_cast<std::size_t>(a)](i, j) =
            static_cast<double>(lookup(concat(u, a, v))) / n;
      }
    }
  }
  out.lambda_row = basis.lambda_row();
  out.lambda_col = basis.lambda_col();
  out.estimator = kind;
  return out;
}

}  // namespace wfa
