#pragma once

#include "wfa/automata.hpp"
#include "wfa/hankel.hpp"

namespace wfa {

/// H ~ Q R with a shared inner dimension.
struct RankFactorization {
  Matrix Q;  // p x n
  Matrix R;  // n x s
};

/// Relative cutoff for every pseudo-inverse in the learners. On empirical
/// blocks this is the only implicit regularization.
inline constexpr double kPinvCutoff = 1e-10;

/// <h_{r,lambda}^T R^+, Q^+ h_{c,lambda}, {Q^+ H_a R^+}>. A factorization whose
/// Q or R has numerical rank below n is reported through warn(), not rejected.
WeightedAutomaton wa_from_factorization(const HankelBlocks& blocks, const RankFactorization& fact);

/// Spectral learner with n states: factor H = (H V_n) V_n^T using the top-n
/// right singular vectors and recover the operators from that factorization.
WeightedAutomaton svd_learn(const HankelBlocks& blocks, int n);

}  // namespace wfa
