#include "wfa/local_loss.hpp"

#include <algorithm>
#include <string>

#include "wfa/linalg.hpp"
#include "wfa/spectral.hpp"

namespace wfa {

namespace {

void check_shapes(const HankelBlocks& blocks, const SoVariables& vars) {
  const Index s = blocks.n_suffixes();
  const Index n = vars.X.cols();
  if (vars.X.rows() != s) throw InputError("X must have one row per suffix");
  if (vars.beta_inf.size() != n) throw InputError("beta_inf length differs from X columns");
  if (vars.B.size() != blocks.H_a.size()) throw InputError("need one B_a per symbol");
  for (const auto& b : vars.B) {
    if (b.rows() != n || b.cols() != n) throw InputError("B_a must be n x n");
  }
}

}  // namespace

double LocalLossTerms::total() const {
  double t = final_term;
  for (const double x : symbol_terms) t += x;
  return t;
}

LocalLossTerms local_loss_terms(const HankelBlocks& blocks, const SoVariables& vars) {
  blocks.validate();
  check_shapes(blocks, vars);
  const Matrix hx = blocks.H * vars.X;
  LocalLossTerms t;
  t.final_term = (hx * vars.beta_inf - blocks.col_lambda()).squaredNorm();
  t.symbol_terms.reserve(vars.B.size());
  for (std::size_t a = 0; a < vars.B.size(); ++a) {
    t.symbol_terms.push_back((hx * vars.B[a] - blocks.H_a[a] * vars.X).squaredNorm());
  }
  return t;
}

double local_loss_value(const HankelBlocks& blocks, const SoVariables& vars) {
  return local_loss_terms(blocks, vars).total();
}

SoVariables solve_so(const HankelBlocks& blocks, int n) {
  blocks.validate();
  const Index limit = std::min(blocks.n_prefixes(), blocks.n_suffixes());
  if (n < 1 || n > limit) {
    throw InputError("solve_so: n = " + std::to_string(n) + " outside [1, " +
                     std::to_string(limit) + "]");
  }
  const linalg::Svd d = linalg::svd(blocks.H);
  SoVariables vars;
  vars.X = d.V.leftCols(n);
  auto fixed = solve_given_X(blocks, vars.X);
  vars.beta_inf = std::move(fixed.beta_inf);
  vars.B = std::move(fixed.B);
  return vars;
}

FixedXSolution solve_given_X(const HankelBlocks& blocks, const Matrix& X) {
  blocks.validate();
  if (X.rows() != blocks.n_suffixes()) throw InputError("X must have one row per suffix");
  const Index n = X.cols();
  const double gap = (X.transpose() * X - Matrix::Identity(n, n)).norm();
  if (gap > 1e-8) {
    throw InputError("X is not orthonormal: ||X^T X - I||_F = " + std::to_string(gap));
  }
  const Matrix hx = blocks.H * X;
  FixedXSolution out;
  const double hx_norm = linalg::spectral_norm(hx);
  if (hx_norm == 0.0 || hx_norm <= kPinvCutoff * linalg::spectral_norm(blocks.H)) {
    warn("solve_given_X: H X is numerically zero; returning zero operators");
    out.beta_inf = Vector::Zero(n);
    out.B.assign(blocks.H_a.size(), Matrix::Zero(n, n));
    return out;
  }
  const Matrix hx_pinv = linalg::pinv(hx, kPinvCutoff);
  out.beta_inf = hx_pinv * blocks.col_lambda();
  out.B.reserve(blocks.H_a.size());
  for (const auto& ha : blocks.H_a) out.B.emplace_back(hx_pinv * (ha * X));
  return out;
}

WeightedAutomaton extract_wa_so(const HankelBlocks& blocks, const SoVariables& vars) {
  check_shapes(blocks, vars);
  Vector alpha1 = (blocks.row_lambda() * vars.X).transpose();
  return WeightedAutomaton(std::move(alpha1), vars.beta_inf, vars.B);
}

}  // namespace wfa
