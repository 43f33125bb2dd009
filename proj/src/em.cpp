#include "wfa/em.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

namespace wfa {

namespace {

constexpr std::size_t kChunk = 256;

// Scaled forward-backward on one string, adding weight * posteriors to `acc`.
void accumulate(const Pnfa& p, const Word& x, double weight, EmCounts& acc,
                std::vector<RowVector>& alpha, std::vector<double>& scale) {
  const std::size_t len = x.size();
  alpha.resize(len + 1);
  scale.resize(len + 2);

  alpha[0] = p.initial().transpose();
  scale[0] = alpha[0].sum();
  if (!(scale[0] > 0.0)) {
    ++acc.zero_probability;
    acc.log_likelihood = -std::numeric_limits<double>::infinity();
    return;
  }
  alpha[0] /= scale[0];
  for (std::size_t t = 1; t <= len; ++t) {
    alpha[t] = alpha[t - 1] * p.trans(x[t - 1]);
    scale[t] = alpha[t].sum();
    if (!(scale[t] > 0.0)) {
      ++acc.zero_probability;
      acc.log_likelihood = -std::numeric_limits<double>::infinity();
      return;
    }
    alpha[t] /= scale[t];
  }
  scale[len + 1] = alpha[len].dot(p.stop().transpose());
  if (!(scale[len + 1] > 0.0)) {
    ++acc.zero_probability;
    acc.log_likelihood = -std::numeric_limits<double>::infinity();
    return;
  }
  double ll = 0.0;
  for (const double c : scale) ll += std::log(c);
  acc.log_likelihood += weight * ll;

  acc.stop += (weight / scale[len + 1]) * alpha[len].transpose().cwiseProduct(p.stop());
  Vector beta = p.stop() / scale[len + 1];
  for (std::size_t t = len; t >= 1; --t) {
    const Matrix& a = p.trans(x[t - 1]);
    auto& counts = acc.trans[static_cast<std::size_t>(x[t - 1])];
    counts.noalias() += (weight / scale[t]) *
                        (alpha[t - 1].transpose() * beta.transpose()).cwiseProduct(a);
    beta = (a * beta) / scale[t];
  }
  acc.initial += (weight / scale[0]) * p.initial().cwiseProduct(beta);
}

void check_alphabet(const Pnfa& p, const WeightedStrings& data) {
  for (const auto& x : data.strings) {
    for (const Symbol a : x) {
      if (a < 0 || a >= p.alphabet_size()) throw InputError("sample symbol outside pnfa alphabet");
    }
  }
}

}  // namespace

void EmConfig::validate() const {
  if (n_states < 1) throw InputError("EM needs n_states >= 1");
  if (max_iter < 1) throw InputError("EM needs max_iter >= 1");
  if (!(rel_tol >= 0.0)) throw InputError("EM rel_tol must be nonnegative");
}

EmCounts::EmCounts(int n, int m)
    : initial(Vector::Zero(n)),
      trans(static_cast<std::size_t>(m), Matrix::Zero(n, n)),
      stop(Vector::Zero(n)) {}

EmCounts& EmCounts::operator+=(const EmCounts& other) {
  initial += other.initial;
  for (std::size_t a = 0; a < trans.size(); ++a) trans[a] += other.trans[a];
  stop += other.stop;
  log_likelihood += other.log_likelihood;
  zero_probability += other.zero_probability;
  return *this;
}

WeightedStrings compress(const StringSample& sample) {
  std::map<Word, double, ShortLex> counts;
  for (const auto& x : sample.strings) counts[x] += 1.0;
  WeightedStrings out;
  out.strings.reserve(counts.size());
  out.weights.reserve(counts.size());
  for (auto& [w, c] : counts) {
    out.strings.push_back(w);
    out.weights.push_back(c);
  }
  return out;
}

double log_likelihood(const Pnfa& p, const StringSample& sample) {
  return expected_counts(p, compress(sample)).log_likelihood;
}

EmCounts expected_counts(const Pnfa& p, const WeightedStrings& data) {
  check_alphabet(p, data);
  const int n = p.n_states();
  const int m = p.alphabet_size();
  const std::size_t total = data.strings.size();
  const std::size_t chunks = (total + kChunk - 1) / kChunk;
  std::vector<EmCounts> partial(chunks, EmCounts(n, m));

#pragma omp parallel
  {
    std::vector<RowVector> alpha;
    std::vector<double> scale;
#pragma omp for schedule(dynamic, 1)
    for (std::size_t c = 0; c < chunks; ++c) {
      const std::size_t end = std::min(total, (c + 1) * kChunk);
      for (std::size_t i = c * kChunk; i < end; ++i) {
        accumulate(p, data.strings[i], data.weights[i], partial[c], alpha, scale);
      }
    }
  }

  EmCounts out(n, m);
  for (const auto& c : partial) out += c;
  return out;
}

namespace serial {

EmCounts expected_counts(const Pnfa& p, const WeightedStrings& data) {
  check_alphabet(p, data);
  EmCounts out(p.n_states(), p.alphabet_size());
  std::vector<RowVector> alpha;
  std::vector<double> scale;
  for (std::size_t i = 0; i < data.strings.size(); ++i) {
    accumulate(p, data.strings[i], data.weights[i], out, alpha, scale);
  }
  return out;
}

}  // namespace serial

MStep maximize(const EmCounts& counts) {
  const Index n = counts.initial.size();
  const auto m = static_cast<Index>(counts.trans.size());
  int reset = 0;

  Vector initial = counts.initial;
  const double init_total = initial.sum();
  if (init_total > 0.0) {
    initial /= init_total;
  } else {
    initial.setConstant(1.0 / static_cast<double>(n));
  }

  std::vector<Matrix> trans(static_cast<std::size_t>(m), Matrix::Zero(n, n));
  Vector stop(n);
  for (Index i = 0; i < n; ++i) {
    double row = counts.stop(i);
    for (const auto& t : counts.trans) row += t.row(i).sum();
    if (row > 0.0 && std::isfinite(row)) {
      stop(i) = counts.stop(i) / row;
      for (Index a = 0; a < m; ++a) {
        trans[static_cast<std::size_t>(a)].row(i) =
            counts.trans[static_cast<std::size_t>(a)].row(i) / row;
      }
    } else {
      ++reset;
      const double u = 1.0 / static_cast<double>(m * n + 1);
      stop(i) = u;
      for (auto& t : trans) t.row(i).setConstant(u);
    }
  }
  return MStep{Pnfa(std::move(initial), std::move(trans), std::move(stop)), reset};
}

EmFit em_fit(const StringSample& sample, const EmConfig& config) {
  config.validate();
  if (sample.empty()) throw InputError("EM needs a nonempty sample");
  sample.validate();
  const WeightedStrings data = compress(sample);

  Rng rng(config.seed);
  Pnfa model = random_pnfa(config.n_states, sample.alphabet_size, rng, 1.0);
  std::vector<double> trace;
  int iterations = 0;
  int reset_total = 0;
  bool converged = false;

  for (int k = 0; k < config.max_iter; ++k) {
    const EmCounts counts = expected_counts(model, data);
    const double ll = counts.log_likelihood;
    if (!trace.empty()) {
      const double prev = trace.back();
      const double change = std::abs(ll - prev) / std::max(std::abs(prev), 1e-300);
      trace.push_back(ll);
      if (change < config.rel_tol) {
        converged = true;
        break;
      }
    } else {
      trace.push_back(ll);
    }
    MStep step = maximize(counts);
    reset_total += step.reset_states;
    model = std::move(step.model);
    ++iterations;
  }
  if (!converged) trace.push_back(expected_counts(model, data).log_likelihood);
  return EmFit{std::move(model), std::move(trace), iterations, converged, reset_total};
}

}  // namespace wfa
