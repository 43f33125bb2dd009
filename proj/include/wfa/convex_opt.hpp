#pragma once

#include <optional>
#include <vector>

#include "wfa/automata.hpp"
#include "wfa/hankel.hpp"

namespace wfa {

struct CoConfig {
  double tau = 1.0;
  int max_iter = 5000;
  /// Stop once |F_k - F_{k-1}| / max(|F_{k-1}|, tiny) falls below this.
  double rel_tol = 1e-9;
  /// The objective test only ends the run once the plain proximal step also
  /// moves B by at most this much relative to 1 + ||B||_F.
  double fixed_point_tol = 1e-6;
  /// Momentum with restart whenever the objective would increase.
  bool acceleration = true;

  void validate() const;
};

struct CoSolution {
  double tau = 0.0;
  Matrix B_sigma;                      // s x (m s), [B_a1, ..., B_am]
  std::vector<double> objective_trace; // one entry per iteration, non-increasing
  int iterations = 0;
  bool converged = false;
  /// Step size used, 1 / (2 tau sigma_max(H)^2); 0 when H is zero.
  double step = 0.0;
};

/// ||B_Sigma||_* + tau ||H B_Sigma - H_Sigma||_F^2.
double relaxed_loss(const HankelBlocks& blocks, const Matrix& b_sigma, double tau);

/// Proximal operator of gamma ||.||_*: soft-threshold the singular values.
Matrix svt(const Matrix& m, double gamma);

/// 2 tau H^T (H B - H_Sigma), the gradient of the smooth part.
Matrix relaxed_loss_gradient(const HankelBlocks& blocks, const Matrix& b_sigma, double tau);

/// Proximal gradient on the relaxed loss, starting from B = 0.
CoSolution solve_co(const HankelBlocks& blocks, const CoConfig& config);

/// Same iteration from an explicit starting point.
CoSolution solve_co(const HankelBlocks& blocks, const CoConfig& config, const Matrix& start);

/// tau -> infinity limit: with a compact SVD [H_Sigma, H] = U L [V_Sigma^T V^T],
/// returns (V^T)^+ V_Sigma^T. Requires rank(H) = rank([H_Sigma, H]) at
/// relative tolerance 1e-8; throws NumericError naming both ranks otherwise.
Matrix closed_form_infinite_tau(const HankelBlocks& blocks);

/// <h_{r,lambda}^T, e_lambda, slices of B_Sigma>, an automaton with s states.
WeightedAutomaton extract_wa_co(const HankelBlocks& blocks, const Matrix& b_sigma);

}  // namespace wfa
