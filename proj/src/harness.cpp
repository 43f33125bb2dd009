#include "wfa/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <limits>
#include <map>
#include <ostream>
#include <tuple>
#include <unordered_map>

#include "wfa/convex_opt.hpp"
#include "wfa/em.hpp"
#include "wfa/io.hpp"
#include "wfa/linalg.hpp"
#include "wfa/spectral.hpp"

namespace wfa {

namespace {

constexpr double kMaxNodes = 1e7;

void check_enumeration(int m, int max_length) {
  if (max_length < 0) throw InputError("length bound must be >= 0");
  double nodes = 0.0, layer = 1.0;
  for (int j = 0; j <= max_length; ++j) {
    nodes += layer;
    layer *= m;
  }
  if (nodes > kMaxNodes) {
    throw InputError("enumerating all strings up to length " + std::to_string(max_length) +
                     " needs more than 10^7 nodes; choose a smaller bound");
  }
}

void check_pair(const WeightedAutomaton& a, const WeightedAutomaton& b) {
  if (a.alphabet_size() != b.alphabet_size()) {
    throw InputError("automata have different alphabet sizes");
  }
}

// Depth-first accumulation below one node. `fa`/`fb` hold the prefix state
// vectors per depth; depth 0 is the node passed in.
struct Enumerator {
  const WeightedAutomaton& a;
  const WeightedAutomaton& b;
  int max_length;
  std::vector<RowVector> fa, fb;
  L1Distance acc;

  Enumerator(const WeightedAutomaton& a_, const WeightedAutomaton& b_, int max_length_)
      : a(a_), b(b_), max_length(max_length_),
        fa(static_cast<std::size_t>(max_length_) + 1),
        fb(static_cast<std::size_t>(max_length_) + 1) {}

  void visit(int depth) {
    const auto d = static_cast<std::size_t>(depth);
    const double va = fa[d].dot(a.alpha_inf());
    const double vb = fb[d].dot(b.alpha_inf());
    acc.distance += std::abs(va - vb);
    acc.mass += va;
    if (depth == max_length) return;
    for (Symbol s = 0; s < a.alphabet_size(); ++s) {
      fa[d + 1].noalias() = fa[d] * a.op(s);
      fb[d + 1].noalias() = fb[d] * b.op(s);
      visit(depth + 1);
    }
  }

  L1Distance run_from(const RowVector& start_a, const RowVector& start_b, int start_depth) {
    acc = {};
    fa[static_cast<std::size_t>(start_depth)] = start_a;
    fb[static_cast<std::size_t>(start_depth)] = start_b;
    visit(start_depth);
    return acc;
  }
};

}  // namespace

namespace serial {

L1Distance l1_distance(const WeightedAutomaton& a, const WeightedAutomaton& b, int max_length) {
  check_pair(a, b);
  check_enumeration(a.alphabet_size(), max_length);
  Enumerator e(a, b, max_length);
  return e.run_from(a.alpha1().transpose(), b.alpha1().transpose(), 0);
}

}  // namespace serial

L1Distance l1_distance(const WeightedAutomaton& a, const WeightedAutomaton& b, int max_length) {
  check_pair(a, b);
  check_enumeration(a.alphabet_size(), max_length);
  const int m = a.alphabet_size();

  // Split at the shallowest depth with enough subtrees to share out; the
  // nodes above it are visited serially.
  int split = 0;
  double width = 1.0;
  while (split < max_length && width < 64.0) {
    ++split;
    width *= m;
  }
  std::vector<RowVector> starts_a{a.alpha1().transpose()};
  std::vector<RowVector> starts_b{b.alpha1().transpose()};
  L1Distance top;
  for (int depth = 0; depth < split; ++depth) {
    std::vector<RowVector> next_a, next_b;
    next_a.reserve(starts_a.size() * static_cast<std::size_t>(m));
    next_b.reserve(starts_b.size() * static_cast<std::size_t>(m));
    for (std::size_t i = 0; i < starts_a.size(); ++i) {
      const double va = starts_a[i].dot(a.alpha_inf());
      const double vb = starts_b[i].dot(b.alpha_inf());
      top.distance += std::abs(va - vb);
      top.mass += va;
      for (Symbol s = 0; s < m; ++s) {
        next_a.emplace_back(starts_a[i] * a.op(s));
        next_b.emplace_back(starts_b[i] * b.op(s));
      }
    }
    starts_a = std::move(next_a);
    starts_b = std::move(next_b);
  }

  const auto count = static_cast<std::ptrdiff_t>(starts_a.size());
  std::vector<L1Distance> parts(starts_a.size());
#pragma omp parallel
  {
    Enumerator e(a, b, max_length);
#pragma omp for schedule(dynamic, 1)
    for (std::ptrdiff_t i = 0; i < count; ++i) {
      const auto k = static_cast<std::size_t>(i);
      parts[k] = e.run_from(starts_a[k], starts_b[k], split);
    }
  }
  for (const auto& p : parts) {
    top.distance += p.distance;
    top.mass += p.mass;
  }
  return top;
}

L1Result l1_error(const Pnfa& target, const WeightedAutomaton& learned, int max_length) {
  const L1Distance d = l1_distance(pnfa_to_wa(target), learned, max_length);
  return L1Result{d.distance, std::clamp(1.0 - d.mass, 0.0, 1.0)};
}

double l1_to_sample(const WeightedAutomaton& wa, const StringSample& sample, int max_length) {
  if (sample.empty()) throw InputError("validation sample is empty");
  // sum |f - p_hat| = sum |f| + sum over observed x of (|f(x) - p_hat(x)| - |f(x)|).
  const L1Distance base =
      l1_distance(wa, WeightedAutomaton::zero(1, wa.alphabet_size()), max_length);
  std::map<Word, double, ShortLex> freq;
  const double inv_n = 1.0 / static_cast<double>(sample.size());
  for (const auto& x : sample.strings) {
    if (x.size() <= static_cast<std::size_t>(max_length)) freq[x] += inv_n;
  }
  double total = base.distance;
  for (const auto& [x, p] : freq) {
    const double f = evaluate(wa, x);
    total += std::abs(f - p) - std::abs(f);
  }
  return std::max(total, 0.0);
}

double operator_nuclear_norm(const WeightedAutomaton& wa) {
  return linalg::nuclear_norm(linalg::hconcat(wa.ops()));
}

std::string to_string(LearnerKind kind) {
  switch (kind) {
    case LearnerKind::svd: return "svd";
    case LearnerKind::co: return "co";
    case LearnerKind::em: return "em";
  }
  return "svd";
}

LearnerKind parse_learner(const std::string& name) {
  if (name == "svd") return LearnerKind::svd;
  if (name == "co") return LearnerKind::co;
  if (name == "em") return LearnerKind::em;
  throw InputError("unknown learner '" + name + "' (expected svd|co|em)");
}

double model_select(const std::vector<ResultRecord>& records) {
  if (records.empty()) throw InputError("model_select: no records");
  const bool use_validation = std::all_of(records.begin(), records.end(), [](const auto& r) {
    return std::isfinite(r.validation_error);
  });
  auto score = [&](const ResultRecord& r) {
    return use_validation ? r.validation_error : r.l1_error;
  };
  // Ties: smaller n for svd/em, larger tau for co.
  auto smaller_model = [](const ResultRecord& x, const ResultRecord& y) {
    if (x.learner == LearnerKind::co) return x.hyperparameter > y.hyperparameter;
    return x.hyperparameter < y.hyperparameter;
  };
  const ResultRecord* best = &records.front();
  for (const auto& r : records) {
    const double sr = score(r), sb = score(*best);
    if (sr < sb || (sr == sb && smaller_model(r, *best))) best = &r;
  }
  return best->hyperparameter;
}

std::string sample_digest(const std::vector<Word>& strings, std::size_t count) {
  std::uint64_t h = 1469598103934665603ULL;
  auto mix = [&h](std::uint64_t x) {
    for (int i = 0; i < 8; ++i) {
      h ^= (x >> (8 * i)) & 0xffU;
      h *= 1099511628211ULL;
    }
  };
  count = std::min(count, strings.size());
  mix(count);
  for (std::size_t i = 0; i < count; ++i) {
    mix(strings[i].size());
    for (const Symbol a : strings[i]) mix(static_cast<std::uint64_t>(a));
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t a, std::uint64_t b) {
  auto splitmix = [](std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
  };
  return splitmix(splitmix(splitmix(base) ^ a) ^ (b * 0x2545f4914f6cdd1dULL));
}

std::vector<double> default_tau_grid() {
  std::vector<double> grid;
  for (int k = 0; k < 13; ++k) grid.push_back(std::pow(10.0, -1.0 + 0.5 * k));
  return grid;
}

void ExperimentConfig::validate() const {
  if (trials < 1) throw InputError("experiment needs trials >= 1");
  if (sample_sizes.empty()) throw InputError("experiment needs at least one sample size");
  for (const auto n : sample_sizes) {
    if (n == 0) throw InputError("sample sizes must be positive");
  }
  if (learners.empty()) throw InputError("experiment needs at least one learner");
  for (const auto& l : learners) {
    if (l.kind == LearnerKind::em && l.grid.empty()) {
      throw InputError("em learner needs an explicit list of state counts");
    }
    for (const double g : l.grid) {
      if (!(g > 0.0)) throw InputError("learner hyperparameters must be positive");
    }
  }
  if (max_length < 1) throw InputError("evaluation length bound L must be >= 1");
  if (target.source == TargetSpec::Source::random) {
    if (target.n_states < 1 || target.alphabet_size < 1) {
      throw InputError("random target needs n_states >= 1 and alphabet_size >= 1");
    }
    if (target.sigma_min_range && !(target.sigma_min_range->first <= target.sigma_min_range->second)) {
      throw InputError("sigma_min stratum bounds are reversed");
    }
  }
}

double target_sigma_min(const Pnfa& target) {
  const Basis basis = length_k_basis(Alphabet(target.alphabet_size()), 1);
  return smallest_singular_value(exact_blocks(pnfa_to_wa(target), basis).H, 1e-9);
}

Pnfa draw_target(const TargetSpec& spec, int trial) {
  if (spec.source == TargetSpec::Source::load) {
    return io::pnfa_from_json(io::read_json_file(spec.path));
  }
  Rng rng(derive_seed(spec.seed, spec.per_trial ? static_cast<std::uint64_t>(trial) : 0, 0x7a));
  constexpr int kMaxDraws = 10'000;
  for (int draw = 0; draw < kMaxDraws; ++draw) {
    Pnfa candidate = random_pnfa(spec.n_states, spec.alphabet_size, rng, spec.concentration);
    if (!spec.sigma_min_range) return candidate;
    const double sigma = target_sigma_min(candidate);
    if (sigma >= spec.sigma_min_range->first && sigma <= spec.sigma_min_range->second) {
      return candidate;
    }
  }
  throw InputError("no random target fell in the sigma_min stratum after 10^4 draws");
}

namespace {

std::vector<ResultRecord> run_trial(const ExperimentConfig& config, int trial) {
  using Clock = std::chrono::steady_clock;
  const Pnfa target = draw_target(config.target, trial);
  const std::string digest = io::digest(io::to_json(target));
  const double sigma = target_sigma_min(target);
  const std::uint64_t seed = derive_seed(config.seed, static_cast<std::uint64_t>(trial));

  Rng sample_rng(seed);
  const std::size_t n_max = *std::max_element(config.sample_sizes.begin(), config.sample_sizes.end());
  const StringSample full = sample_strings(target, n_max, sample_rng);
  std::optional<StringSample> validation;
  if (config.validation_size > 0) {
    Rng vrng(derive_seed(seed, 0x5a11d));
    validation = sample_strings(target, config.validation_size, vrng);
  }

  std::vector<ResultRecord> out;
  for (const std::size_t size : config.sample_sizes) {
    const StringSample sample = full.prefix(size);
    Rng basis_rng(derive_seed(seed, 0xba515, size));
    const Basis basis = [&] {
      switch (config.basis.mode) {
        case BasisSpec::Mode::length_k:
          return length_k_basis(Alphabet(target.alphabet_size()), config.basis.k);
        case BasisSpec::Mode::random:
          return random_basis(sample, basis_rng);
        case BasisSpec::Mode::frequency:
          return frequency_basis(sample, config.basis.max_len, config.basis.dim, basis_rng);
      }
      throw InputError("unknown basis mode");
    }();
    const HankelBlocks blocks = empirical_blocks(sample, basis, config.estimator);
    const std::string sdigest = sample_digest(full.strings, size);
    const int max_n = static_cast<int>(std::min(basis.n_prefixes(), basis.n_suffixes()));
    const double sigma_h = linalg::spectral_norm(blocks.H);
    const double tau_unit = sigma_h > 0.0 ? 1.0 / (sigma_h * sigma_h) : 1.0;

    auto record = [&](LearnerKind kind, double hyper, const WeightedAutomaton& wa, double nuclear,
                      double seconds) {
      const L1Result l1 = l1_error(target, wa, config.max_length);
      ResultRecord r;
      r.trial = trial;
      r.seed = seed;
      r.target_digest = digest;
      r.target_sigma_min = sigma;
      r.learner = kind;
      r.hyperparameter = hyper;
      r.sample_size = size;
      r.sample_digest = sdigest;
      r.l1_error = l1.error;
      r.tail_mass = l1.tail_mass;
      r.validation_error = validation ? l1_to_sample(wa, *validation, config.max_length)
                                      : std::numeric_limits<double>::quiet_NaN();
      r.model_nuclear_norm = nuclear;
      r.wall_time_s = config.record_timing ? seconds : 0.0;
      r.flagged = !(l1.error <= 2.0);
      out.push_back(std::move(r));
    };

    for (const auto& learner : config.learners) {
      std::vector<double> grid = learner.grid;
      const bool relative = learner.tau_relative || grid.empty();
      if (grid.empty()) {
        if (learner.kind == LearnerKind::co) {
          grid = default_tau_grid();
        } else {
          for (int n = 1; n <= max_n; ++n) grid.push_back(n);
        }
      }
      for (const double hyper : grid) {
        const auto t0 = Clock::now();
        switch (learner.kind) {
          case LearnerKind::svd: {
            const int n = static_cast<int>(hyper);
            if (n > max_n) continue;
            const WeightedAutomaton wa = svd_learn(blocks, n);
            const double secs = std::chrono::duration<double>(Clock::now() - t0).count();
            record(learner.kind, n, wa, operator_nuclear_norm(wa), secs);
            break;
          }
          case LearnerKind::co: {
            CoConfig cc;
            cc.tau = relative ? hyper * tau_unit : hyper;
            if (learner.max_iter > 0) cc.max_iter = learner.max_iter;
            if (learner.rel_tol > 0.0) cc.rel_tol = learner.rel_tol;
            const CoSolution sol = solve_co(blocks, cc);
            const WeightedAutomaton wa = extract_wa_co(blocks, sol.B_sigma);
            const double secs = std::chrono::duration<double>(Clock::now() - t0).count();
            record(learner.kind, cc.tau, wa, linalg::nuclear_norm(sol.B_sigma), secs);
            break;
          }
          case LearnerKind::em: {
            EmConfig ec;
            ec.n_states = static_cast<int>(hyper);
            ec.seed = derive_seed(seed, 0xe3, static_cast<std::uint64_t>(ec.n_states));
            if (learner.max_iter > 0) ec.max_iter = learner.max_iter;
            if (learner.rel_tol > 0.0) ec.rel_tol = learner.rel_tol;
            const EmFit fit = em_fit(sample, ec);
            const WeightedAutomaton wa = pnfa_to_wa(fit.model);
            const double secs = std::chrono::duration<double>(Clock::now() - t0).count();
            record(learner.kind, ec.n_states, wa, operator_nuclear_norm(wa), secs);
            break;
          }
        }
      }
    }
  }
  return out;
}

auto record_key(const ResultRecord& r) {
  return std::make_tuple(r.trial, static_cast<int>(r.learner), r.sample_size, r.hyperparameter);
}

}  // namespace

std::vector<ResultRecord> run_learning_curve(const ExperimentConfig& config) {
  config.validate();
  std::vector<std::vector<ResultRecord>> per_trial(static_cast<std::size_t>(config.trials));
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(config.trials));
#pragma omp parallel for schedule(dynamic, 1)
  for (int t = 0; t < config.trials; ++t) {
    try {
      per_trial[static_cast<std::size_t>(t)] = run_trial(config, t);
    } catch (...) {
      errors[static_cast<std::size_t>(t)] = std::current_exception();
    }
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  std::vector<ResultRecord> all;
  for (auto& v : per_trial) {
    for (auto& r : v) all.push_back(std::move(r));
  }
  std::stable_sort(all.begin(), all.end(),
                   [](const auto& x, const auto& y) { return record_key(x) < record_key(y); });
  return all;
}

std::vector<CurveSummaryRow> summarize_curve(const std::vector<ResultRecord>& records) {
  std::map<std::tuple<int, std::size_t, int>, std::vector<ResultRecord>> sweeps;
  for (const auto& r : records) {
    sweeps[{static_cast<int>(r.learner), r.sample_size, r.trial}].push_back(r);
  }
  std::map<std::pair<int, std::size_t>, std::vector<double>> best;
  for (const auto& [key, sweep] : sweeps) {
    const double h = model_select(sweep);
    for (const auto& r : sweep) {
      if (r.hyperparameter == h) {
        best[{std::get<0>(key), std::get<1>(key)}].push_back(r.l1_error);
        break;
      }
    }
  }
  std::vector<CurveSummaryRow> out;
  for (auto& [key, errs] : best) {
    std::sort(errs.begin(), errs.end());
    const std::size_t k = errs.size();
    const double median = k % 2 ? errs[k / 2] : 0.5 * (errs[k / 2 - 1] + errs[k / 2]);
    out.push_back({static_cast<LearnerKind>(key.first), key.second, median, static_cast<int>(k)});
  }
  return out;
}

namespace {

std::string fmt_double(double x) {
  if (std::isnan(x)) return "";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

}  // namespace

void write_csv(std::ostream& out, const std::vector<ResultRecord>& records) {
  out << "trial,seed,target_digest,target_sigma_min,learner,hyperparameter,sample_size,"
         "sample_digest,l1_error,tail_mass,validation_error,model_nuclear_norm,wall_time_s,"
         "flagged\n";
  for (const auto& r : records) {
    out << r.trial << ',' << r.seed << ',' << r.target_digest << ','
        << fmt_double(r.target_sigma_min) << ',' << to_string(r.learner) << ','
        << fmt_double(r.hyperparameter) << ',' << r.sample_size << ',' << r.sample_digest << ','
        << fmt_double(r.l1_error) << ',' << fmt_double(r.tail_mass) << ','
        << fmt_double(r.validation_error) << ',' << fmt_double(r.model_nuclear_norm) << ','
        << fmt_double(r.wall_time_s) << ',' << (r.flagged ? 1 : 0) << '\n';
  }
}

int target_rank(const WeightedAutomaton& wa, double rel_tol) {
  const Basis basis = length_k_basis(Alphabet(wa.alphabet_size()), 3);
  const int r = numerical_rank(exact_blocks(wa, basis).H, rel_tol);
  if (r > wa.n_states()) {
    throw NumericError("rank estimate " + std::to_string(r) + " exceeds the state count " +
                       std::to_string(wa.n_states()));
  }
  return r;
}

std::vector<SuccessRow> basis_success_experiment(const Pnfa& target,
                                                 const std::vector<std::size_t>& sizes,
                                                 int trials, std::uint64_t seed) {
  if (trials < 1) throw InputError("basis_success_experiment needs trials >= 1");
  const WeightedAutomaton wa = pnfa_to_wa(target);
  const int rank_f = target_rank(wa);
  const PnfaSampler sampler(target);

  std::vector<SuccessRow> rows;
  for (const std::size_t n : sizes) {
    if (n == 0) throw InputError("sample sizes must be positive");
    std::vector<char> ok(static_cast<std::size_t>(trials), 0);
#pragma omp parallel for schedule(dynamic, 1)
    for (int t = 0; t < trials; ++t) {
      Rng rng(derive_seed(seed, n, static_cast<std::uint64_t>(t)));
      StringSample sample;
      sample.alphabet_size = target.alphabet_size();
      sample.strings.reserve(n);
      for (std::size_t i = 0; i < n; ++i) sample.strings.push_back(sampler.draw(rng));
      const Basis basis = random_basis(sample, rng);
      const InducedFactors f = induced_factors(wa, basis);
      ok[static_cast<std::size_t>(t)] = factored_numerical_rank(f.P, f.S, 1e-9) == rank_f;
    }
    const int succ = static_cast<int>(std::count(ok.begin(), ok.end(), 1));
    rows.push_back({n, trials, succ, static_cast<double>(succ) / trials, rank_f});
  }
  return rows;
}

void write_success_csv(std::ostream& out, const std::vector<SuccessRow>& rows) {
  out << "sample_size,trials,successes,rate,target_rank\n";
  for (const auto& r : rows) {
    out << r.sample_size << ',' << r.trials << ',' << r.successes << ',' << fmt_double(r.rate)
        << ',' << r.target_rank << '\n';
  }
}

}  // namespace wfa
