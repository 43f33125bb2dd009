#pragma once

#include <vector>

#include "wfa/automata.hpp"
#include "wfa/hankel.hpp"

namespace wfa {

/// Variables of the orthonormally constrained local loss with n states.
struct SoVariables {
  Matrix X;                // s x n, feasible when X^T X = I
  Vector beta_inf;         // n
  std::vector<Matrix> B;   // m matrices, n x n
};

/// The two parts of the local loss, kept apart for inspection.
struct LocalLossTerms {
  double final_term = 0.0;           // ||H X beta_inf - h_{c,lambda}||^2
  std::vector<double> symbol_terms;  // ||H X B_a - H_a X||_F^2 per symbol
  double total() const;
};

LocalLossTerms local_loss_terms(const HankelBlocks& blocks, const SoVariables& vars);

/// ||H X beta_inf - h_{c,lambda}||^2 + sum_a ||H X B_a - H_a X||_F^2.
double local_loss_value(const HankelBlocks& blocks, const SoVariables& vars);

/// The SVD construction: X = V_n, beta_inf = (H V_n)^+ h_{c,lambda},
/// B_a = (H V_n)^+ H_a V_n. Optimal (zero loss) on exact blocks for n >= rank.
SoVariables solve_so(const HankelBlocks& blocks, int n);

struct FixedXSolution {
  Vector beta_inf;
  std::vector<Matrix> B;
};

/// Least-squares minimizers of the loss for fixed orthonormal X. Requires
/// ||X^T X - I||_F <= 1e-8.
FixedXSolution solve_given_X(const HankelBlocks& blocks, const Matrix& X);

/// <h_{r,lambda}^T X, beta_inf, {B_a}>.
WeightedAutomaton extract_wa_so(const HankelBlocks& blocks, const SoVariables& vars);

}  // namespace wfa
