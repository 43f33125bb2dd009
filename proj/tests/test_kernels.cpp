// The OpenMP kernels against their serial references, with more threads
// than cores so the work splitting is exercised.
#include "doctest.h"

#include <omp.h>

#include "support.hpp"
#include "wfa/em.hpp"
#include "wfa/harness.hpp"
#include "wfa/hankel.hpp"

using namespace wfa;

namespace {

struct Threads {
  explicit Threads(int n) : saved(omp_get_max_threads()) { omp_set_num_threads(n); }
  ~Threads() { omp_set_num_threads(saved); }
  int saved;
};

}  // namespace

TEST_CASE("exact blocks: parallel equals serial") {
  Threads threads(4);
  Rng rng(1);
  for (int t = 0; t < 5; ++t) {
    const auto wa = pnfa_to_wa(random_pnfa(5, 3, rng));
    const Basis basis = length_k_basis(Alphabet(3), 2);
    const auto fast = exact_blocks(wa, basis);
    const auto ref = serial::exact_blocks(wa, basis);
    CHECK((fast.H - ref.H).cwiseAbs().maxCoeff() <= 1e-15);
    for (int a = 0; a < 3; ++a) CHECK((fast.H_a[a] - ref.H_a[a]).cwiseAbs().maxCoeff() <= 1e-15);
  }
}

TEST_CASE("empirical blocks: parallel equals serial, bit for bit") {
  Threads threads(4);
  Rng rng(2);
  const Pnfa p = random_pnfa(4, 3, rng);
  const auto sample = sample_strings(p, 1000, rng);
  const Basis drawn = random_basis(sample.prefix(60), rng);
  for (const auto kind : {EstimatorKind::word, EstimatorKind::prefix, EstimatorKind::substring}) {
    for (const Basis& basis : {length_k_basis(Alphabet(3), 2), drawn}) {
      const auto fast = empirical_blocks(sample, basis, kind);
      const auto ref = serial::empirical_blocks(sample, basis, kind);
      CHECK(fast.H == ref.H);
      for (int a = 0; a < 3; ++a) CHECK(fast.H_a[a] == ref.H_a[a]);
    }
  }
}

TEST_CASE("empirical blocks on a basis with symbols outside the sample alphabet") {
  const StringSample s{2, {{0, 1}, {1}}};
  const Basis basis({{0}, {5}}, {{1}});
  const auto fast = empirical_blocks(s, basis, EstimatorKind::substring);
  const auto ref = serial::empirical_blocks(s, basis, EstimatorKind::substring);
  CHECK(fast.H == ref.H);
}

TEST_CASE("truncated L1: parallel equals serial") {
  Threads threads(4);
  Rng rng(3);
  for (int t = 0; t < 4; ++t) {
    const auto a = pnfa_to_wa(random_pnfa(4, 3, rng));
    const auto b = pnfa_to_wa(random_pnfa(3, 3, rng));
    for (int L : {0, 1, 3, 7}) {
      const auto fast = l1_distance(a, b, L);
      const auto ref = serial::l1_distance(a, b, L);
      CHECK(fast.distance == doctest::Approx(ref.distance).epsilon(1e-12));
      CHECK(fast.mass == doctest::Approx(ref.mass).epsilon(1e-12));
    }
  }
}

TEST_CASE("parallel L1 does not depend on the thread count") {
  Rng rng(4);
  const auto a = pnfa_to_wa(random_pnfa(3, 2, rng));
  const auto b = pnfa_to_wa(random_pnfa(3, 2, rng));
  double one, four;
  {
    Threads t(1);
    one = l1_distance(a, b, 10).distance;
  }
  {
    Threads t(4);
    four = l1_distance(a, b, 10).distance;
  }
  CHECK(one == four);
}

TEST_CASE("EM expected counts: chunked equals single pass") {
  Threads threads(4);
  Rng rng(5);
  const Pnfa target = random_pnfa(3, 2, rng);
  const Pnfa model = random_pnfa(4, 2, rng);
  const auto data = compress(sample_strings(target, 5000, rng));
  const auto fast = expected_counts(model, data);
  const auto ref = serial::expected_counts(model, data);
  CHECK(fast.log_likelihood == doctest::Approx(ref.log_likelihood).epsilon(1e-12));
  CHECK((fast.initial - ref.initial).norm() <= 1e-9 * ref.initial.norm());
  CHECK((fast.stop - ref.stop).norm() <= 1e-9 * ref.stop.norm());
  for (int a = 0; a < 2; ++a) CHECK((fast.trans[a] - ref.trans[a]).norm() <= 1e-9 * ref.trans[a].norm());

  double one_ll, four_ll;
  {
    Threads t(1);
    one_ll = expected_counts(model, data).log_likelihood;
  }
  four_ll = expected_counts(model, data).log_likelihood;
  CHECK(one_ll == four_ll);
}
