// Serial reference vs OpenMP kernel, side by side. Thread count follows
// OMP_NUM_THREADS.
#include <benchmark/benchmark.h>

#include "wfa/automata.hpp"
#include "wfa/em.hpp"
#include "wfa/harness.hpp"
#include "wfa/hankel.hpp"

namespace {

using namespace wfa;

struct Fixture {
  Pnfa target;
  WeightedAutomaton wa;
  StringSample sample;
  StringSample small;  // the serial substring reference is quadratic per string
  Basis basis;
  WeightedStrings weighted;

  Fixture()
      : target(make_target()),
        wa(pnfa_to_wa(target)),
        sample(make_sample(target)),
        small(sample.prefix(5000)),
        basis(length_k_basis(Alphabet(3), 3)),
        weighted(compress(sample)) {}

  static Pnfa make_target() {
    Rng rng(derive_seed(99, 0));
    return random_pnfa(6, 3, rng);
  }
  static StringSample make_sample(const Pnfa& p) {
    Rng rng(derive_seed(99, 1));
    return sample_strings(p, 50000, rng);
  }
};

const Fixture& fixture() {
  static const Fixture f;
  return f;
}

void BM_exact_blocks_serial(benchmark::State& st) {
  const auto& f = fixture();
  for (auto _ : st) benchmark::DoNotOptimize(serial::exact_blocks(f.wa, f.basis));
}
void BM_exact_blocks_omp(benchmark::State& st) {
  const auto& f = fixture();
  for (auto _ : st) benchmark::DoNotOptimize(exact_blocks(f.wa, f.basis));
}

void BM_empirical_blocks_serial(benchmark::State& st) {
  const auto& f = fixture();
  const auto kind = static_cast<EstimatorKind>(st.range(0));
  for (auto _ : st) benchmark::DoNotOptimize(serial::empirical_blocks(f.small, f.basis, kind));
}
void BM_empirical_blocks_omp(benchmark::State& st) {
  const auto& f = fixture();
  const auto kind = static_cast<EstimatorKind>(st.range(0));
  for (auto _ : st) benchmark::DoNotOptimize(empirical_blocks(f.small, f.basis, kind));
}

void BM_l1_distance_serial(benchmark::State& st) {
  const auto& f = fixture();
  for (auto _ : st) benchmark::DoNotOptimize(serial::l1_distance(f.wa, f.wa, static_cast<int>(st.range(0))));
}
void BM_l1_distance_omp(benchmark::State& st) {
  const auto& f = fixture();
  for (auto _ : st) benchmark::DoNotOptimize(l1_distance(f.wa, f.wa, static_cast<int>(st.range(0))));
}

void BM_em_counts_serial(benchmark::State& st) {
  const auto& f = fixture();
  for (auto _ : st) benchmark::DoNotOptimize(serial::expected_counts(f.target, f.weighted));
}
void BM_em_counts_omp(benchmark::State& st) {
  const auto& f = fixture();
  for (auto _ : st) benchmark::DoNotOptimize(expected_counts(f.target, f.weighted));
}

}  // namespace

BENCHMARK(BM_exact_blocks_serial);
BENCHMARK(BM_exact_blocks_omp);
BENCHMARK(BM_empirical_blocks_serial)->DenseRange(0, 2);
BENCHMARK(BM_empirical_blocks_omp)->DenseRange(0, 2);
BENCHMARK(BM_l1_distance_serial)->Arg(6)->Arg(8);
BENCHMARK(BM_l1_distance_omp)->Arg(6)->Arg(8);
BENCHMARK(BM_em_counts_serial);
BENCHMARK(BM_em_counts_omp);

BENCHMARK_MAIN();
