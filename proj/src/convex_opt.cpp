#include "wfa/convex_opt.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "wfa/linalg.hpp"
#include "wfa/spectral.hpp"

namespace wfa {

namespace {

void check_b_shape(const HankelBlocks& blocks, const Matrix& b) {
  const Index s = blocks.n_suffixes();
  const Index m = blocks.alphabet_size();
  if (b.rows() != s || b.cols() != m * s) {
    throw InputError("B_sigma must be s x (m s) = " + std::to_string(s) + " x " +
                     std::to_string(m * s));
  }
}

}  // namespace

void CoConfig::validate() const {
  if (!(tau > 0.0) || !std::isfinite(tau)) throw InputError("tau must be positive and finite");
  if (max_iter < 1) throw InputError("max_iter must be >= 1");
  if (!(rel_tol >= 0.0)) throw InputError("rel_tol must be nonnegative");
  if (!(fixed_point_tol >= 0.0)) throw InputError("fixed_point_tol must be nonnegative");
}

double relaxed_loss(const HankelBlocks& blocks, const Matrix& b_sigma, double tau) {
  blocks.validate();
  check_b_shape(blocks, b_sigma);
  const Matrix residual = blocks.H * b_sigma - blocks.h_sigma();
  return linalg::nuclear_norm(b_sigma) + tau * residual.squaredNorm();
}

Matrix relaxed_loss_gradient(const HankelBlocks& blocks, const Matrix& b_sigma, double tau) {
  return 2.0 * tau * blocks.H.transpose() * (blocks.H * b_sigma - blocks.h_sigma());
}

Matrix svt(const Matrix& m, double gamma) {
  if (gamma < 0.0) throw InputError("svt threshold must be nonnegative");
  if (m.size() == 0) return m;
  const linalg::Svd d = linalg::svd(m);
  const Vector shrunk = (d.sigma.array() - gamma).max(0.0).matrix();
  Index keep = 0;
  while (keep < shrunk.size() && shrunk(keep) > 0.0) ++keep;
  if (keep == 0) return Matrix::Zero(m.rows(), m.cols());
  return d.U.leftCols(keep) * shrunk.head(keep).asDiagonal() * d.V.leftCols(keep).transpose();
}

CoSolution solve_co(const HankelBlocks& blocks, const CoConfig& config) {
  const Index s = blocks.n_suffixes();
  return solve_co(blocks, config, Matrix::Zero(s, blocks.alphabet_size() * s));
}

CoSolution solve_co(const HankelBlocks& blocks, const CoConfig& config, const Matrix& start) {
  blocks.validate();
  config.validate();
  check_b_shape(blocks, start);

  CoSolution sol;
  sol.tau = config.tau;
  const double sigma_max = linalg::spectral_norm(blocks.H);
  if (sigma_max == 0.0) {
    sol.B_sigma = Matrix::Zero(start.rows(), start.cols());
    sol.converged = true;
    return sol;
  }

  const double tau = config.tau;
  const double step = 1.0 / (2.0 * tau * sigma_max * sigma_max);
  sol.step = step;
  const Matrix h_sigma = blocks.h_sigma();
  const Matrix hth = blocks.H.transpose() * blocks.H;
  const Matrix hth_sigma = blocks.H.transpose() * h_sigma;

  auto objective = [&](const Matrix& b) {
    return linalg::nuclear_norm(b) + tau * (blocks.H * b - h_sigma).squaredNorm();
  };
  auto prox_step = [&](const Matrix& y) {
    const Matrix grad = 2.0 * tau * (hth * y - hth_sigma);
    return svt(y - step * grad, step);
  };
  auto at_fixed_point = [&](const Matrix& b) {
    return (b - prox_step(b)).norm() <= config.fixed_point_tol * (1.0 + b.norm());
  };

  Matrix x = start;
  double fx = objective(x);
  Matrix y = x;
  double t = 1.0;
  sol.objective_trace.reserve(static_cast<std::size_t>(std::min(config.max_iter, 1 << 16)));

  for (int k = 0; k < config.max_iter; ++k) {
    Matrix x_new = prox_step(config.acceleration ? y : x);
    double f_new = objective(x_new);
    if (config.acceleration && f_new > fx) {
      // Restart: drop momentum and take a plain proximal step from x.
      t = 1.0;
      x_new = prox_step(x);
      f_new = objective(x_new);
    }
    ++sol.iterations;
    if (f_new > fx) {
      // A plain proximal step cannot increase the objective beyond rounding;
      // hitting this means we are at the floating-point floor.
      sol.objective_trace.push_back(fx);
      sol.converged = at_fixed_point(x);
      break;
    }
    const double change = std::abs(fx - f_new) / std::max(std::abs(fx), 1e-300);
    if (config.acceleration) {
      const double t_new = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
      y = x_new + ((t - 1.0) / t_new) * (x_new - x);
      t = t_new;
    }
    x = std::move(x_new);
    fx = f_new;
    sol.objective_trace.push_back(fx);
    if (change < config.rel_tol && at_fixed_point(x)) {
      sol.converged = true;
      break;
    }
  }
  sol.B_sigma = std::move(x);
  return sol;
}

Matrix closed_form_infinite_tau(const HankelBlocks& blocks) {
  blocks.validate();
  const Index s = blocks.n_suffixes();
  const Index ms = blocks.alphabet_size() * s;
  Matrix joint(blocks.n_prefixes(), ms + s);
  joint << blocks.h_sigma(), blocks.H;

  constexpr double kRankTol = 1e-8;
  const int rank_h = numerical_rank(blocks.H, kRankTol);
  const linalg::Svd d = linalg::svd(joint);
  const int rank_joint = linalg::rank_from_singular_values(d.sigma, kRankTol);
  if (rank_h != rank_joint) {
    throw NumericError("closed form needs rank(H) = rank([H_Sigma, H]); got rank(H) = " +
                       std::to_string(rank_h) + ", rank([H_Sigma, H]) = " +
                       std::to_string(rank_joint));
  }
  if (rank_joint == 0) return Matrix::Zero(s, ms);
  const Matrix v = d.V.leftCols(rank_joint);       // (ms + s) x k
  const Matrix v_sigma_t = v.topRows(ms).transpose(); // k x ms
  const Matrix v_h_t = v.bottomRows(s).transpose();   // k x s
  return linalg::pinv(v_h_t, kPinvCutoff) * v_sigma_t;
}

WeightedAutomaton extract_wa_co(const HankelBlocks& blocks, const Matrix& b_sigma) {
  blocks.validate();
  check_b_shape(blocks, b_sigma);
  const Index s = blocks.n_suffixes();
  Vector alpha1 = blocks.row_lambda().transpose();
  Vector e_lambda = Vector::Zero(s);
  e_lambda(blocks.lambda_col) = 1.0;
  return WeightedAutomaton(std::move(alpha1), std::move(e_lambda),
                           linalg::hsplit(b_sigma, blocks.alphabet_size()));
}

}  // namespace wfa
