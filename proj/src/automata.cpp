#include "wfa/automata.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "wfa/linalg.hpp"

namespace wfa {

namespace {

bool all_finite(const Matrix& m) { return m.allFinite(); }

void check_symbols(const WeightedAutomaton& wa, const Word& x) {
  for (const Symbol a : x) {
    if (a < 0 || a >= wa.alphabet_size()) {
      throw InputError("symbol " + std::to_string(a) + " outside alphabet of size " +
                       std::to_string(wa.alphabet_size()));
    }
  }
}

// (I - A)^{-1} y for A = sum_a A_a, after checking the Neumann series converges.
Matrix neumann_inverse(const WeightedAutomaton& wa) {
  const Matrix a = wa.total_operator();
  const double rho = spectral_radius_estimate(a);
  if (!(rho < 1.0 - 1e-6)) {
    throw NumericError("spectral radius of the summed operator is " + std::to_string(rho) +
                       " (needs < 1 - 1e-6); the series over Sigma* diverges");
  }
  const Index n = a.rows();
  return (Matrix::Identity(n, n) - a).fullPivLu().inverse();
}

}  // namespace

Alphabet::Alphabet(int size) : size_(size) {
  if (size < 1) throw InputError("alphabet size must be >= 1");
}

WeightedAutomaton::WeightedAutomaton(Vector alpha1, Vector alpha_inf, std::vector<Matrix> ops)
    : alpha1_(std::move(alpha1)), alpha_inf_(std::move(alpha_inf)), ops_(std::move(ops)) {
  const Index n = alpha1_.size();
  if (n < 1) throw InputError("weighted automaton needs at least one state");
  if (alpha_inf_.size() != n) throw InputError("alpha_inf length differs from alpha1 length");
  if (ops_.empty()) throw InputError("weighted automaton needs at least one operator");
  for (const auto& op : ops_) {
    if (op.rows() != n || op.cols() != n) throw InputError("operator shape differs from n x n");
    if (!all_finite(op)) throw InputError("operator has non-finite entries");
  }
  if (!alpha1_.allFinite() || !alpha_inf_.allFinite()) {
    throw InputError("initial/final vector has non-finite entries");
  }
}

WeightedAutomaton WeightedAutomaton::zero(int n_states, int alphabet_size) {
  return WeightedAutomaton(Vector::Zero(n_states), Vector::Zero(n_states),
                           std::vector<Matrix>(static_cast<std::size_t>(alphabet_size),
                                               Matrix::Zero(n_states, n_states)));
}

Matrix WeightedAutomaton::total_operator() const {
  Matrix a = Matrix::Zero(n_states(), n_states());
  for (const auto& op : ops_) a += op;
  return a;
}

Pnfa::Pnfa(Vector initial, std::vector<Matrix> trans, Vector stop)
    : initial_(std::move(initial)), trans_(std::move(trans)), stop_(std::move(stop)) {
  const Index n = initial_.size();
  if (n < 1) throw InputError("pnfa needs at least one state");
  if (trans_.empty()) throw InputError("pnfa needs at least one symbol");
  if (stop_.size() != n) throw InputError("pnfa stop vector length differs from state count");
  if ((initial_.array() < 0).any() || !initial_.allFinite()) {
    throw InputError("pnfa initial vector must be finite and nonnegative");
  }
  if (std::abs(initial_.sum() - 1.0) > kStochasticTol) {
    throw InputError("pnfa initial vector does not sum to 1");
  }
  if ((stop_.array() < 0).any() || !stop_.allFinite()) {
    throw InputError("pnfa stop vector must be finite and nonnegative");
  }
  Vector rows = stop_;
  for (const auto& t : trans_) {
    if (t.rows() != n || t.cols() != n) throw InputError("pnfa transition shape differs from n x n");
    if ((t.array() < 0).any() || !t.allFinite()) {
      throw InputError("pnfa transitions must be finite and nonnegative");
    }
    rows += t.rowwise().sum();
  }
  for (Index i = 0; i < n; ++i) {
    if (std::abs(rows(i) - 1.0) > kStochasticTol) {
      throw InputError("pnfa state " + std::to_string(i) + " outcome mass is " +
                       std::to_string(rows(i)) + ", expected 1");
    }
  }
}

void StringSample::validate() const {
  if (alphabet_size < 1) throw InputError("sample alphabet size must be >= 1");
  for (const auto& s : strings) {
    for (const Symbol a : s) {
      if (a < 0 || a >= alphabet_size) {
        throw InputError("sample symbol " + std::to_string(a) + " outside alphabet of size " +
                         std::to_string(alphabet_size));
      }
    }
  }
}

StringSample StringSample::prefix(std::size_t count) const {
  StringSample out;
  out.alphabet_size = alphabet_size;
  const auto k = std::min(count, strings.size());
  out.strings.assign(strings.begin(), strings.begin() + static_cast<std::ptrdiff_t>(k));
  return out;
}

RowVector forward(const WeightedAutomaton& wa, const Word& u) {
  check_symbols(wa, u);
  RowVector state = wa.alpha1().transpose();
  for (const Symbol a : u) state = state * wa.op(a);
  return state;
}

Vector backward(const WeightedAutomaton& wa, const Word& v) {
  check_symbols(wa, v);
  Vector state = wa.alpha_inf();
  for (auto it = v.rbegin(); it != v.rend(); ++it) state = wa.op(*it) * state;
  return state;
}

double evaluate(const WeightedAutomaton& wa, const Word& x) {
  return forward(wa, x).dot(wa.alpha_inf());
}

WeightedAutomaton change_of_basis(const WeightedAutomaton& wa, const Matrix& m) {
  const Index n = wa.n_states();
  if (m.rows() != n || m.cols() != n) throw InputError("change of basis matrix must be n x n");
  const double cond = linalg::condition_number(m);
  if (!(cond <= 1e12)) {
    throw NumericError("change of basis matrix is singular or ill-conditioned (cond = " +
                       std::to_string(cond) + ")");
  }
  const auto lu = m.fullPivLu();
  const Matrix m_inv = lu.inverse();
  std::vector<Matrix> ops;
  ops.reserve(wa.ops().size());
  for (const auto& a : wa.ops()) ops.emplace_back(m_inv * a * m);
  return WeightedAutomaton(m.transpose() * wa.alpha1(), m_inv * wa.alpha_inf(), std::move(ops));
}

WeightedAutomaton pnfa_to_wa(const Pnfa& p) {
  return WeightedAutomaton(p.initial(), p.stop(), p.trans());
}

double uniform01(Rng& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

PnfaSampler::PnfaSampler(const Pnfa& p) {
  const int n = p.n_states();
  const int m = p.alphabet_size();
  double acc = 0.0;
  initial_cdf_.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    acc += p.initial()(i);
    initial_cdf_.push_back(acc);
  }
  outcomes_.resize(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    auto& table = outcomes_[static_cast<std::size_t>(i)];
    double c = p.stop()(i);
    table.push_back({c, -1, -1});
    for (int a = 0; a < m; ++a) {
      for (int j = 0; j < n; ++j) {
        const double w = p.trans(a)(i, j);
        if (w <= 0.0) continue;
        c += w;
        table.push_back({c, a, j});
      }
    }
  }
}

Word PnfaSampler::draw(Rng& rng) const {
  // Draws are scaled by the table total so rounding in the cumulative sums
  // can never leave a gap at the top.
  auto pick_state = [&]() {
    const double u = uniform01(rng) * initial_cdf_.back();
    const auto it = std::upper_bound(initial_cdf_.begin(), initial_cdf_.end(), u);
    return static_cast<int>(std::min<std::ptrdiff_t>(it - initial_cdf_.begin(),
                                                     static_cast<std::ptrdiff_t>(initial_cdf_.size()) - 1));
  };
  Word out;
  int state = pick_state();
  for (;;) {
    const auto& table = outcomes_[static_cast<std::size_t>(state)];
    const double u = uniform01(rng) * table.back().cumulative;
    auto it = std::upper_bound(table.begin(), table.end(), u,
                               [](double x, const Outcome& o) { return x < o.cumulative; });
    if (it == table.end()) --it;
    if (it->symbol < 0) return out;
    out.push_back(it->symbol);
    state = it->next;
    if (out.size() > kMaxLength) {
      throw NumericError("sampled string exceeded 10^6 symbols; the pnfa never stops");
    }
  }
}

Word sample_string(const Pnfa& p, Rng& rng) { return PnfaSampler(p).draw(rng); }

StringSample sample_strings(const Pnfa& p, std::size_t count, Rng& rng) {
  const PnfaSampler sampler(p);
  StringSample out;
  out.alphabet_size = p.alphabet_size();
  out.strings.reserve(count);
  for (std::size_t i = 0; i < count; ++i) out.strings.push_back(sampler.draw(rng));
  return out;
}

namespace {

std::vector<double> dirichlet(std::size_t k, double concentration, Rng& rng) {
  std::gamma_distribution<double> gamma(concentration, 1.0);
  std::vector<double> w(k);
  double total = 0.0;
  do {
    total = 0.0;
    for (auto& x : w) {
      x = gamma(rng);
      total += x;
    }
  } while (!(total > 0.0));
  for (auto& x : w) x /= total;
  return w;
}

}  // namespace

Pnfa random_pnfa(int n_states, int alphabet_size, Rng& rng, double concentration) {
  if (n_states < 1) throw InputError("random_pnfa: n_states must be >= 1");
  if (alphabet_size < 1) throw InputError("random_pnfa: alphabet size must be >= 1");
  if (!(concentration > 0.0)) throw InputError("random_pnfa: concentration must be positive");
  const auto n = static_cast<std::size_t>(n_states);
  const auto m = static_cast<std::size_t>(alphabet_size);

  Vector initial(n_states);
  {
    const auto w = dirichlet(n, concentration, rng);
    for (std::size_t i = 0; i < n; ++i) initial(static_cast<Index>(i)) = w[i];
  }
  std::vector<Matrix> trans(m, Matrix::Zero(n_states, n_states));
  Vector stop(n_states);
  for (std::size_t i = 0; i < n; ++i) {
    // Outcome layout: [stop, (a=0, j=0..n-1), (a=1, ...), ...].
    const auto w = dirichlet(m * n + 1, concentration, rng);
    stop(static_cast<Index>(i)) = w[0];
    for (std::size_t a = 0; a < m; ++a) {
      for (std::size_t j = 0; j < n; ++j) {
        trans[a](static_cast<Index>(i), static_cast<Index>(j)) = w[1 + a * n + j];
      }
    }
  }
  return Pnfa(std::move(initial), std::move(trans), std::move(stop));
}

double spectral_radius_estimate(const Matrix& a, int iterations) {
  if (a.rows() != a.cols()) throw InputError("spectral radius needs a square matrix");
  if (a.rows() == 0) return 0.0;
  Vector x = Vector::Ones(a.rows()) / std::sqrt(static_cast<double>(a.rows()));
  // A fixed irrational perturbation avoids starting orthogonal to the
  // dominant direction on structured inputs.
  for (Index i = 0; i < x.size(); ++i) x(i) += 1e-3 * std::sin(1.0 + static_cast<double>(i));
  x.normalize();
  const int burn_in = iterations / 2;
  double log_growth = 0.0;
  int counted = 0;
  for (int k = 0; k < iterations; ++k) {
    Vector y = a * x;
    const double g = y.norm();
    if (g == 0.0) return 0.0;
    if (k >= burn_in) {
      log_growth += std::log(g);
      ++counted;
    }
    x = y / g;
  }
  return std::exp(log_growth / std::max(counted, 1));
}

WeightedAutomaton to_prefix_automaton(const WeightedAutomaton& wa) {
  const Matrix inv = neumann_inverse(wa);
  return WeightedAutomaton(wa.alpha1(), inv * wa.alpha_inf(), wa.ops());
}

WeightedAutomaton to_substring_automaton(const WeightedAutomaton& wa) {
  const Matrix inv = neumann_inverse(wa);
  return WeightedAutomaton(inv.transpose() * wa.alpha1(), inv * wa.alpha_inf(), wa.ops());
}

}  // namespace wfa
