#include "wfa/linalg.hpp"

#include <atomic>
#include <cmath>
#include <iostream>
#include <limits>

namespace wfa {

namespace {
std::atomic<bool> g_warnings_enabled{true};
std::atomic<std::uint64_t> g_warning_count{0};
}  // namespace

void warn(std::string_view message) {
  ++g_warning_count;
  if (g_warnings_enabled.load(std::memory_order_relaxed)) {
    std::cerr << "warning: " << message << '\n';
  }
}

void set_warnings_enabled(bool enabled) { g_warnings_enabled = enabled; }

std::uint64_t warning_count() { return g_warning_count.load(); }

Word concat(const Word& u, const Word& v) {
  Word w;
  w.reserve(u.size() + v.size());
  w.insert(w.end(), u.begin(), u.end());
  w.insert(w.end(), v.begin(), v.end());
  return w;
}

Word concat(const Word& u, Symbol a, const Word& v) {
  Word w;
  w.reserve(u.size() + v.size() + 1);
  w.insert(w.end(), u.begin(), u.end());
  w.push_back(a);
  w.insert(w.end(), v.begin(), v.end());
  return w;
}

std::string to_string(const Word& w) {
  if (w.empty()) return "λ";
  std::string out;
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (i) out += ' ';
    out += std::to_string(w[i]);
  }
  return out;
}

}  // namespace wfa

namespace wfa::linalg {

Svd svd(const Matrix& m) {
  Svd out;
  if (m.size() == 0) {
    out.U = Matrix(m.rows(), 0);
    out.V = Matrix(m.cols(), 0);
    out.sigma = Vector(0);
    return out;
  }
  Eigen::BDCSVD<Matrix> dec(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
  out.U = dec.matrixU();
  out.V = dec.matrixV();
  out.sigma = dec.singularValues();
  for (Index k = 0; k < out.V.cols(); ++k) {
    Index arg = 0;
    out.V.col(k).cwiseAbs().maxCoeff(&arg);
    if (out.V(arg, k) < 0) {
      out.V.col(k) *= -1.0;
      out.U.col(k) *= -1.0;
    }
  }
  return out;
}

Vector singular_values(const Matrix& m) {
  if (m.size() == 0) return Vector(0);
  Eigen::BDCSVD<Matrix> dec(m);
  return dec.singularValues();
}

int rank_from_singular_values(const Vector& sigma, double rel_tol) {
  if (sigma.size() == 0 || sigma(0) <= 0.0) return 0;
  const double cut = rel_tol * sigma(0);
  int r = 0;
  for (Index i = 0; i < sigma.size(); ++i) {
    if (sigma(i) > cut) ++r;
  }
  return r;
}

Matrix pinv(const Matrix& m, double rel_cutoff) {
  if (m.size() == 0) return Matrix::Zero(m.cols(), m.rows());
  const Svd d = svd(m);
  const int r = rank_from_singular_values(d.sigma, rel_cutoff);
  if (r == 0) return Matrix::Zero(m.cols(), m.rows());
  const Vector inv = d.sigma.head(r).cwiseInverse();
  return d.V.leftCols(r) * inv.asDiagonal() * d.U.leftCols(r).transpose();
}

double nuclear_norm(const Matrix& m) { return singular_values(m).sum(); }

double spectral_norm(const Matrix& m) {
  const Vector s = singular_values(m);
  return s.size() ? s(0) : 0.0;
}

double condition_number(const Matrix& m) {
  const Vector s = singular_values(m);
  if (s.size() == 0) return 1.0;
  const double smin = s(s.size() - 1);
  if (smin <= 0.0) return std::numeric_limits<double>::infinity();
  return s(0) / smin;
}

Matrix hconcat(const std::vector<Matrix>& blocks) {
  if (blocks.empty()) return Matrix(0, 0);
  const Index rows = blocks.front().rows();
  Index cols = 0;
  for (const auto& b : blocks) {
    if (b.rows() != rows) throw InputError("hconcat: row count mismatch");
    cols += b.cols();
  }
  Matrix out(rows, cols);
  Index at = 0;
  for (const auto& b : blocks) {
    out.middleCols(at, b.cols()) = b;
    at += b.cols();
  }
  return out;
}

std::vector<Matrix> hsplit(const Matrix& m, int count) {
  if (count <= 0 || m.cols() % count != 0) {
    throw InputError("hsplit: column count is not a multiple of the slice count");
  }
  const Index w = m.cols() / count;
  std::vector<Matrix> out;
  out.reserve(count);
  for (int k = 0; k < count; ++k) out.emplace_back(m.middleCols(k * w, w));
  return out;
}

}  // namespace wfa::linalg
