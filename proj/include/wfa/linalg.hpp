#pragma once

#include "wfa/types.hpp"

namespace wfa::linalg {

/// Thin SVD M = U diag(sigma) V^T with sigma in descending order.
/// Signs are normalized so that the largest-magnitude entry of every right
/// singular vector is positive (left vectors follow), which makes repeated
/// runs reproducible.
struct Svd {
  Matrix U;
  Vector sigma;
  Matrix V;
};

Svd svd(const Matrix& m);

/// Singular values only, descending.
Vector singular_values(const Matrix& m);

/// Moore-Penrose pseudo-inverse; singular values at or below
/// rel_cutoff * sigma_max are treated as zero.
Matrix pinv(const Matrix& m, double rel_cutoff = 1e-10);

/// Number of singular values above rel_tol * sigma_max; 0 for a zero matrix.
int rank_from_singular_values(const Vector& sigma, double rel_tol);

double nuclear_norm(const Matrix& m);
double spectral_norm(const Matrix& m);

/// sigma_max / sigma_min of a square matrix; +inf when singular.
double condition_number(const Matrix& m);

/// [blocks[0], blocks[1], ...] side by side; all blocks share a row count.
Matrix hconcat(const std::vector<Matrix>& blocks);

/// Inverse of hconcat for `count` equally wide slices.
std::vector<Matrix> hsplit(const Matrix& m, int count);

}  // namespace wfa::linalg
