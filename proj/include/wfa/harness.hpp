#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "wfa/automata.hpp"
#include "wfa/hankel.hpp"

namespace wfa {

// ---------------------------------------------------------------------------
// Metrics

struct L1Result {
  double error = 0.0;      // sum over |x| <= L of |f_target(x) - f_learned(x)|
  double tail_mass = 0.0;  // 1 - sum over |x| <= L of f_target(x), clamped to [0, 1]
};

/// Truncated L1 distance by depth-first enumeration carrying prefix state
/// vectors of both automata. Rejects enumerations beyond 10^7 nodes.
L1Result l1_error(const Pnfa& target, const WeightedAutomaton& learned, int max_length);

struct L1Distance {
  double distance = 0.0;  // sum over |x| <= L of |f_a(x) - f_b(x)|
  double mass = 0.0;      // sum over |x| <= L of f_a(x)
};

/// Truncated L1 distance between two automata.
L1Distance l1_distance(const WeightedAutomaton& a, const WeightedAutomaton& b, int max_length);

/// sum over |x| <= L of |f(x) - p_hat(x)| for the empirical distribution of a sample.
double l1_to_sample(const WeightedAutomaton& wa, const StringSample& sample, int max_length);

/// Nuclear norm of [A_1, ..., A_m].
double operator_nuclear_norm(const WeightedAutomaton& wa);

namespace serial {
/// Single recursive pass; reference for the parallel enumeration.
L1Distance l1_distance(const WeightedAutomaton& a, const WeightedAutomaton& b, int max_length);
}  // namespace serial

// ---------------------------------------------------------------------------
// Experiment records

enum class LearnerKind { svd, co, em };

std::string to_string(LearnerKind kind);
LearnerKind parse_learner(const std::string& name);

struct ResultRecord {
  int trial = 0;
  std::uint64_t seed = 0;
  std::string target_digest;
  double target_sigma_min = 0.0;
  LearnerKind learner = LearnerKind::svd;
  double hyperparameter = 0.0;  // n for svd/em, tau for co
  std::size_t sample_size = 0;
  std::string sample_digest;
  double l1_error = 0.0;
  double tail_mass = 0.0;
  /// Held-out truncated L1 if a validation sample was configured, NaN otherwise.
  double validation_error = 0.0;
  double model_nuclear_norm = 0.0;
  double wall_time_s = 0.0;
  /// Set when l1_error > 2; such records are kept, never dropped.
  bool flagged = false;
};

/// Best hyperparameter of one learner sweep: argmin of the validation error
/// when every record has one, of the L1 error otherwise. Ties go to the
/// smaller model (smaller n, larger tau).
double model_select(const std::vector<ResultRecord>& records);

/// Digest of an ordered string list (FNV-1a, 16 hex digits).
std::string sample_digest(const std::vector<Word>& strings, std::size_t count);

// ---------------------------------------------------------------------------
// Learning curves

struct TargetSpec {
  enum class Source { random, load } source = Source::random;
  std::string path;  // for load
  int n_states = 5;
  int alphabet_size = 3;
  double concentration = 1.0;
  std::uint64_t seed = 1;
  /// Accept a random target only if sigma_min of its exact length-1 block lies here.
  std::optional<std::pair<double, double>> sigma_min_range;
  /// Draw a fresh target per trial; otherwise one target, resampled data.
  bool per_trial = true;
};

struct BasisSpec {
  enum class Mode { length_k, random, frequency } mode = Mode::length_k;
  int k = 1;
  int max_len = 4;
  int dim = 10;
};

struct LearnerSpec {
  LearnerKind kind = LearnerKind::svd;
  /// n values for svd/em (empty svd list = 1..min(p, s)), tau values for co
  /// (empty = the default grid).
  std::vector<double> grid;
  /// For co: grid values are multipliers of 1 / sigma_max(H)^2, so the sweep
  /// follows the scale of the blocks. Always on for the default grid. The
  /// recorded hyperparameter is the resulting tau.
  bool tau_relative = false;
  int max_iter = 0;      // 0 = learner default
  double rel_tol = 0.0;  // 0 = learner default
};

struct ExperimentConfig {
  std::uint64_t seed = 1;
  int trials = 1;
  TargetSpec target;
  std::vector<std::size_t> sample_sizes;
  BasisSpec basis;
  EstimatorKind estimator = EstimatorKind::word;
  std::vector<LearnerSpec> learners;
  int max_length = 8;
  std::size_t validation_size = 0;
  bool record_timing = false;

  void validate() const;
};

/// 13 log-spaced values from 1e-1 to 1e5.
std::vector<double> default_tau_grid();

/// Runs every trial, size and learner hyperparameter; records come back
/// sorted by (trial, learner, sample size, hyperparameter) whatever the
/// completion order.
std::vector<ResultRecord> run_learning_curve(const ExperimentConfig& config);

/// Draws the target for one trial, applying the sigma_min stratum by rejection.
Pnfa draw_target(const TargetSpec& spec, int trial);

/// sigma_min of H on the length-1 basis, as used for stratification.
double target_sigma_min(const Pnfa& target);

struct CurveSummaryRow {
  LearnerKind learner;
  std::size_t sample_size;
  double median_best_l1;
  int trials;
};

/// Per (learner, size): the median over trials of the selected model's L1 error.
std::vector<CurveSummaryRow> summarize_curve(const std::vector<ResultRecord>& records);

void write_csv(std::ostream& out, const std::vector<ResultRecord>& records);

// ---------------------------------------------------------------------------
// Random basis success rates

struct SuccessRow {
  std::size_t sample_size;
  int trials;
  int successes;
  double rate;
  int target_rank;
};

/// Rank of f from the exact block on the length-3 basis; must not exceed the
/// target's state count.
int target_rank(const WeightedAutomaton& wa, double rel_tol = 1e-9);

/// For each N, `trials` fresh samples; success when the exact block on the
/// random basis has rank(f).
std::vector<SuccessRow> basis_success_experiment(const Pnfa& target,
                                                 const std::vector<std::size_t>& sizes,
                                                 int trials, std::uint64_t seed);

void write_success_csv(std::ostream& out, const std::vector<SuccessRow>& rows);

/// splitmix64-based seed derivation, stable across platforms.
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t a, std::uint64_t b = 0);

}  // namespace wfa
