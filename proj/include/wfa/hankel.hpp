#pragma once

#include <optional>
#include <string>
#include <vector>

#include "wfa/automata.hpp"
#include "wfa/types.hpp"

namespace wfa {

/// Prefix set U and suffix set V. Both always contain the empty string, hold
/// no duplicates, and are kept in shortlex order, so the empty string sits at
/// index 0 on both sides.
class Basis {
 public:
  Basis(std::vector<Word> prefixes, std::vector<Word> suffixes);

  const std::vector<Word>& prefixes() const { return prefixes_; }
  const std::vector<Word>& suffixes() const { return suffixes_; }
  Index n_prefixes() const { return static_cast<Index>(prefixes_.size()); }
  Index n_suffixes() const { return static_cast<Index>(suffixes_.size()); }
  Index lambda_row() const { return 0; }
  Index lambda_col() const { return 0; }

  /// Longest |u| + 1 + |v| any block entry needs.
  std::size_t max_entry_length() const;

  /// 64-bit FNV-1a digest of the canonical ordering, as 16 hex digits.
  std::string digest() const;

  friend bool operator==(const Basis&, const Basis&) = default;

 private:
  std::vector<Word> prefixes_;
  std::vector<Word> suffixes_;
};

enum class EstimatorKind { word, prefix, substring };

std::string to_string(EstimatorKind kind);
EstimatorKind parse_estimator(const std::string& name);

/// Hankel sub-blocks on a basis: H(u, v) and one H_a(u, v) per symbol.
/// The lambda row and column are views into H, never separate copies.
struct HankelBlocks {
  Matrix H;
  std::vector<Matrix> H_a;
  Index lambda_row = 0;
  Index lambda_col = 0;
  /// Empty for blocks computed exactly from an automaton.
  std::optional<EstimatorKind> estimator;

  int alphabet_size() const { return static_cast<int>(H_a.size()); }
  Index n_prefixes() const { return H.rows(); }
  Index n_suffixes() const { return H.cols(); }

  /// h_{r,lambda}^T = H(lambda, .)
  auto row_lambda() const { return H.row(lambda_row); }
  /// h_{c,lambda} = H(., lambda)
  auto col_lambda() const { return H.col(lambda_col); }

  /// H_Sigma = [H_a1, ..., H_am].
  Matrix h_sigma() const;

  /// Every block multiplied by c.
  HankelBlocks scaled(double c) const;

  void validate() const;
};

/// The factorization H = P S induced by an automaton: P(u, .) = alpha1^T A_u
/// and S(., v) = A_v alpha_inf.
struct InducedFactors {
  Matrix P;
  Matrix S;
};

InducedFactors induced_factors(const WeightedAutomaton& wa, const Basis& basis);

/// H(u, v) = f(uv) and H_a(u, v) = f(uav), computed from cached prefix and
/// suffix state vectors.
HankelBlocks exact_blocks(const WeightedAutomaton& wa, const Basis& basis);

/// Empirical estimate of the word, prefix or substring functional on the basis.
HankelBlocks empirical_blocks(const StringSample& sample, const Basis& basis, EstimatorKind kind);

/// Random split of every sample string at a uniform position (Algorithm 1).
Basis random_basis(const StringSample& sample, Rng& rng);

/// All strings of length <= k on both sides.
Basis length_k_basis(const Alphabet& alphabet, int k);

/// Substrings of length <= max_len drawn without replacement proportionally
/// to their occurrence counts; `dim` counts the forced empty string.
Basis frequency_basis(const StringSample& sample, int max_len, int dim, Rng& rng);

/// Number of singular values above rel_tol * sigma_max.
/// Use 1e-9 on exact data and 1e-6 on empirical data.
int numerical_rank(const Matrix& m, double rel_tol = 1e-9);

/// Numerical rank of P * S computed from the small core R_P R_S^T of thin QR
/// decompositions. Same singular values as the product, at O((p + s) k^2).
int factored_numerical_rank(const Matrix& p, const Matrix& s, double rel_tol = 1e-9);

/// Smallest singular value among the leading numerical-rank ones.
double smallest_singular_value(const Matrix& m, double rel_tol = 1e-9);

namespace serial {
/// Reference implementations: one evaluate() per cell, one sample scan per
/// cell. Kept for tests and benchmarks.
HankelBlocks exact_blocks(const WeightedAutomaton& wa, const Basis& basis);
HankelBlocks empirical_blocks(const StringSample& sample, const Basis& basis, EstimatorKind kind);
}  // namespace serial

}  // namespace wfa
