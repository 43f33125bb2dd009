#include "wfa/hankel.hpp"

#include <algorithm>
#include <cstdio>
#include <map>
#include <set>

#include "wfa/linalg.hpp"

namespace wfa {

namespace {

std::vector<Word> normalize_side(std::vector<Word> words) {
  words.emplace_back();  // lambda
  std::sort(words.begin(), words.end(), ShortLex{});
  words.erase(std::unique(words.begin(), words.end()), words.end());
  return words;
}

void check_sample(const StringSample& sample) {
  if (sample.empty()) throw InputError("sample is empty");
  sample.validate();
}

}  // namespace

Basis::Basis(std::vector<Word> prefixes, std::vector<Word> suffixes)
    : prefixes_(normalize_side(std::move(prefixes))),
      suffixes_(normalize_side(std::move(suffixes))) {
  for (const auto* side : {&prefixes_, &suffixes_}) {
    for (const auto& w : *side) {
      for (const Symbol a : w) {
        if (a < 0) throw InputError("basis contains a negative symbol");
      }
    }
  }
}

std::size_t Basis::max_entry_length() const {
  std::size_t pu = 0, sv = 0;
  for (const auto& u : prefixes_) pu = std::max(pu, u.size());
  for (const auto& v : suffixes_) sv = std::max(sv, v.size());
  return pu + 1 + sv;
}

std::string Basis::digest() const {
  std::uint64_t h = 1469598103934665603ULL;
  auto mix = [&h](std::uint64_t x) {
    for (int i = 0; i < 8; ++i) {
      h ^= (x >> (8 * i)) & 0xffU;
      h *= 1099511628211ULL;
    }
  };
  for (const auto* side : {&prefixes_, &suffixes_}) {
    mix(side->size());
    for (const auto& w : *side) {
      mix(w.size());
      for (const Symbol a : w) mix(static_cast<std::uint64_t>(a));
    }
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string to_string(EstimatorKind kind) {
  switch (kind) {
    case EstimatorKind::word: return "word";
    case EstimatorKind::prefix: return "prefix";
    case EstimatorKind::substring: return "substring";
  }
  return "word";
}

EstimatorKind parse_estimator(const std::string& name) {
  if (name == "word") return EstimatorKind::word;
  if (name == "prefix") return EstimatorKind::prefix;
  if (name == "substring") return EstimatorKind::substring;
  throw InputError("unknown estimator '" + name + "' (expected word|prefix|substring)");
}

Matrix HankelBlocks::h_sigma() const { return linalg::hconcat(H_a); }

HankelBlocks HankelBlocks::scaled(double c) const {
  HankelBlocks out = *this;
  out.H *= c;
  for (auto& h : out.H_a) h *= c;
  return out;
}

void HankelBlocks::validate() const {
  if (H.size() == 0) throw InputError("Hankel block is empty");
  if (H_a.empty()) throw InputError("Hankel blocks need at least one symbol block");
  if (lambda_row < 0 || lambda_row >= H.rows() || lambda_col < 0 || lambda_col >= H.cols()) {
    throw InputError("lambda index outside the Hankel block");
  }
  if (!H.allFinite()) throw InputError("Hankel block has non-finite entries");
  for (const auto& h : H_a) {
    if (h.rows() != H.rows() || h.cols() != H.cols()) {
      throw InputError("symbol block shape differs from H");
    }
    if (!h.allFinite()) throw InputError("symbol block has non-finite entries");
  }
}

Basis random_basis(const StringSample& sample, Rng& rng) {
  check_sample(sample);
  std::set<Word, ShortLex> us, vs;
  for (const auto& x : sample.strings) {
    std::uniform_int_distribution<std::size_t> pick(0, x.size());
    const auto t = static_cast<std::ptrdiff_t>(pick(rng));
    us.emplace(x.begin(), x.begin() + t);
    vs.emplace(x.begin() + t, x.end());
  }
  return Basis({us.begin(), us.end()}, {vs.begin(), vs.end()});
}

Basis length_k_basis(const Alphabet& alphabet, int k) {
  if (k < 0) throw InputError("length-k basis needs k >= 0");
  const auto m = static_cast<double>(alphabet.size());
  double total = 0.0, layer = 1.0;
  for (int j = 0; j <= k; ++j) {
    total += layer;
    layer *= m;
  }
  if (total > 1e5) throw InputError("length-k basis would exceed 10^5 strings");

  std::vector<Word> all{Word{}};
  std::vector<Word> frontier{Word{}};
  for (int j = 1; j <= k; ++j) {
    std::vector<Word> next;
    for (const auto& w : frontier) {
      for (Symbol a = 0; a < alphabet.size(); ++a) {
        Word x = w;
        x.push_back(a);
        next.push_back(std::move(x));
      }
    }
    all.insert(all.end(), next.begin(), next.end());
    frontier = std::move(next);
  }
  return Basis(all, all);
}

Basis frequency_basis(const StringSample& sample, int max_len, int dim, Rng& rng) {
  check_sample(sample);
  if (max_len < 1) throw InputError("frequency basis needs max_len >= 1");
  if (dim < 1) throw InputError("frequency basis needs dim >= 1");

  std::map<Word, double, ShortLex> counts;
  for (const auto& x : sample.strings) {
    for (std::size_t i = 0; i < x.size(); ++i) {
      const std::size_t top = std::min(x.size(), i + static_cast<std::size_t>(max_len));
      for (std::size_t j = i + 1; j <= top; ++j) {
        counts[Word(x.begin() + static_cast<std::ptrdiff_t>(i),
                    x.begin() + static_cast<std::ptrdiff_t>(j))] += 1.0;
      }
    }
  }
  if (static_cast<std::size_t>(dim) > counts.size() + 1) {
    throw InputError("frequency basis: dim " + std::to_string(dim) + " exceeds the " +
                     std::to_string(counts.size() + 1) + " available substrings");
  }
  std::vector<Word> candidates;
  std::vector<double> weights;
  for (const auto& [w, c] : counts) {
    candidates.push_back(w);
    weights.push_back(c);
  }

  auto draw_side = [&]() {
    std::vector<double> w = weights;
    std::vector<Word> picked;
    for (int k = 1; k < dim; ++k) {
      double total = 0.0;
      for (const double x : w) total += x;
      const double u = uniform01(rng) * total;
      double acc = 0.0;
      std::size_t chosen = w.size();
      for (std::size_t i = 0; i < w.size(); ++i) {
        if (w[i] <= 0.0) continue;
        acc += w[i];
        chosen = i;
        if (u < acc) break;
      }
      picked.push_back(candidates[chosen]);
      w[chosen] = 0.0;
    }
    return picked;
  };
  auto prefixes = draw_side();
  auto suffixes = draw_side();
  return Basis(std::move(prefixes), std::move(suffixes));
}

int numerical_rank(const Matrix& m, double rel_tol) {
  return linalg::rank_from_singular_values(linalg::singular_values(m), rel_tol);
}

int factored_numerical_rank(const Matrix& p, const Matrix& s, double rel_tol) {
  if (p.cols() != s.rows()) throw InputError("factored rank: inner dimensions differ");
  if (p.size() == 0 || s.size() == 0) return 0;
  // P = Q_P R_P and S^T = Q_S R_S, so P S = Q_P (R_P R_S^T) Q_S^T with
  // orthonormal outer factors.
  const Index k = p.cols();
  Eigen::HouseholderQR<Matrix> qp(p);
  Eigen::HouseholderQR<Matrix> qs(s.transpose());
  const Index rp = std::min(p.rows(), k);
  const Index rs = std::min(s.cols(), k);
  const Matrix r_p = qp.matrixQR().topRows(rp).triangularView<Eigen::Upper>();
  const Matrix r_s = qs.matrixQR().topRows(rs).triangularView<Eigen::Upper>();
  return numerical_rank(r_p * r_s.transpose(), rel_tol);
}

double smallest_singular_value(const Matrix& m, double rel_tol) {
  const Vector sigma = linalg::singular_values(m);
  const int r = linalg::rank_from_singular_values(sigma, rel_tol);
  if (r == 0) return 0.0;
  return sigma(r - 1);
}

namespace serial {

HankelBlocks exact_blocks(const WeightedAutomaton& wa, const Basis& basis) {
  const Index p = basis.n_prefixes();
  const Index s = basis.n_suffixes();
  HankelBlocks out;
  out.H.resize(p, s);
  out.H_a.assign(static_cast<std::size_t>(wa.alphabet_size()), Matrix(p, s));
  for (Index i = 0; i < p; ++i) {
    const auto& u = basis.prefixes()[static_cast<std::size_t>(i)];
    for (Index j = 0; j < s; ++j) {
      const auto& v = basis.suffixes()[static_cast<std::size_t>(j)];
      out.H(i, j) = evaluate(wa, concat(u, v));
      for (Symbol a = 0; a < wa.alphabet_size(); ++a) {
        out.H_a[static_cast<std::size_t>(a)](i, j) = evaluate(wa, concat(u, a, v));
      }
    }
  }
  out.lambda_row = basis.lambda_row();
  out.lambda_col = basis.lambda_col();
  return out;
}

namespace {

double count_in(const std::vector<Word>& strings, const Word& w, EstimatorKind kind) {
  double c = 0.0;
  for (const auto& x : strings) {
    switch (kind) {
      case EstimatorKind::word:
        if (x == w) c += 1.0;
        break;
      case EstimatorKind::prefix:
        if (x.size() >= w.size() && std::equal(w.begin(), w.end(), x.begin())) c += 1.0;
        break;
      case EstimatorKind::substring:
        if (x.size() >= w.size()) {
          for (std::size_t i = 0; i + w.size() <= x.size(); ++i) {
            if (std::equal(w.begin(), w.end(), x.begin() + static_cast<std::ptrdiff_t>(i))) {
              c += 1.0;
            }
          }
        }
        break;
    }
  }
  return c;
}

}  // namespace

HankelBlocks empirical_blocks(const StringSample& sample, const Basis& basis, EstimatorKind kind) {
  check_sample(sample);
  const Index p = basis.n_prefixes();
  const Index s = basis.n_suffixes();
  const double n = static_cast<double>(sample.size());
  HankelBlocks out;
  out.H.resize(p, s);
  out.H_a.assign(static_cast<std::size_t>(sample.alphabet_size), Matrix(p, s));
  for (Index i = 0; i < p; ++i) {
    const auto& u = basis.prefixes()[static_cast<std::size_t>(i)];
    for (Index j = 0; j < s; ++j) {
      const auto& v = basis.suffixes()[static_cast<std::size_t>(j)];
      out.H(i, j) = count_in(sample.strings, concat(u, v), kind) / n;
      for (Symbol a = 0; a < sample.alphabet_size; ++a) {
        out.H_a[static_cast<std::size_t>(a)](i, j) =
            count_in(sample.strings, concat(u, a, v), kind) / n;
      }
    }
  }
  out.lambda_row = basis.lambda_row();
  out.lambda_col = basis.lambda_col();
  out.estimator = kind;
  return out;
}

}  // namespace serial

}  // namespace wfa
