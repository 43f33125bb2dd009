#include "wfa/spectral.hpp"

#include <algorithm>
#include <string>

#include "wfa/linalg.hpp"

namespace wfa {

WeightedAutomaton wa_from_factorization(const HankelBlocks& blocks, const RankFactorization& fact) {
  blocks.validate();
  const Index n = fact.Q.cols();
  if (fact.R.rows() != n) throw InputError("factorization inner dimensions differ");
  if (fact.Q.rows() != blocks.n_prefixes() || fact.R.cols() != blocks.n_suffixes()) {
    throw InputError("factorization shape does not match the Hankel block");
  }
  const Vector sq = linalg::singular_values(fact.Q);
  const Vector sr = linalg::singular_values(fact.R);
  const int rq = linalg::rank_from_singular_values(sq, kPinvCutoff);
  const int rr = linalg::rank_from_singular_values(sr, kPinvCutoff);
  if (rq < n || rr < n) {
    warn("degenerate factorization: rank(Q) = " + std::to_string(rq) + ", rank(R) = " +
         std::to_string(rr) + ", inner dimension " + std::to_string(n));
  }
  const Matrix q_pinv = linalg::pinv(fact.Q, kPinvCutoff);
  const Matrix r_pinv = linalg::pinv(fact.R, kPinvCutoff);
  std::vector<Matrix> ops;
  ops.reserve(blocks.H_a.size());
  for (const auto& ha : blocks.H_a) ops.emplace_back(q_pinv * ha * r_pinv);
  Vector alpha1 = (blocks.row_lambda() * r_pinv).transpose();
  Vector alpha_inf = q_pinv * blocks.col_lambda();
  return WeightedAutomaton(std::move(alpha1), std::move(alpha_inf), std::move(ops));
}

WeightedAutomaton svd_learn(const HankelBlocks& blocks, int n) {
  blocks.validate();
  const Index limit = std::min(blocks.n_prefixes(), blocks.n_suffixes());
  if (n < 1 || n > limit) {
    throw InputError("svd_learn: n = " + std::to_string(n) + " outside [1, " +
                     std::to_string(limit) + "]");
  }
  const linalg::Svd d = linalg::svd(blocks.H);
  const Matrix v_n = d.V.leftCols(n);
  return wa_from_factorization(blocks, RankFactorization{blocks.H * v_n, v_n.transpose()});
}

}  // namespace wfa
