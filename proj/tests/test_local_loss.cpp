#include "doctest.h"

#include <cmath>

#include "support.hpp"
#include "wfa/linalg.hpp"
#include "wfa/local_loss.hpp"
#include "wfa/spectral.hpp"

using namespace wfa;

namespace {

SoVariables zero_vars(Index s, int n, int m) {
  return {Matrix::Zero(s, n), Vector::Zero(n), std::vector<Matrix>(static_cast<std::size_t>(m), Matrix::Zero(n, n))};
}

}  // namespace

TEST_CASE("loss on trivial inputs") {
  Rng rng(1);
  HankelBlocks zero;
  zero.H = Matrix::Zero(3, 3);
  zero.H_a = {Matrix::Zero(3, 3), Matrix::Zero(3, 3)};
  SoVariables v{wfa::testing::random_matrix(3, 2, rng), Vector::Ones(2),
                {Matrix::Ones(2, 2), Matrix::Ones(2, 2)}};
  CHECK(local_loss_value(zero, v) == 0.0);

  const auto b = wfa::testing::random_blocks(4, 3, 2, rng);
  CHECK(local_loss_value(b, zero_vars(3, 2, 2)) == doctest::Approx(b.col_lambda().squaredNorm()));
}

TEST_CASE("loss decomposes into its terms") {
  Rng rng(2);
  const auto b = wfa::testing::random_blocks(5, 4, 3, rng);
  SoVariables v{wfa::testing::random_matrix(4, 2, rng), wfa::testing::random_matrix(2, 1, rng),
                {wfa::testing::random_matrix(2, 2, rng), wfa::testing::random_matrix(2, 2, rng),
                 wfa::testing::random_matrix(2, 2, rng)}};
  const auto terms = local_loss_terms(b, v);
  const Matrix HX = b.H * v.X;
  double expect = (HX * v.beta_inf - b.col_lambda()).squaredNorm();
  CHECK(terms.final_term == doctest::Approx(expect).epsilon(1e-14));
  for (int a = 0; a < 3; ++a) {
    const double t = (HX * v.B[a] - b.H_a[a] * v.X).squaredNorm();
    CHECK(terms.symbol_terms[a] == doctest::Approx(t).epsilon(1e-14));
    expect += t;
  }
  CHECK(local_loss_value(b, v) == terms.total());
  CHECK(terms.total() == doctest::Approx(expect).epsilon(1e-14));

  v.B.pop_back();
  CHECK_THROWS_AS(local_loss_value(b, v), InputError);
}

TEST_CASE("solve_so on exact blocks has zero loss and recovers f") {
  Rng rng(3);
  for (int t = 0; t < 20; ++t) {
    const int m = 2 + t % 2;
    const int r = 2 + t % 4;
    const auto target = pnfa_to_wa(wfa::testing::random_rank_target(r, m, rng));
    const auto blocks = exact_blocks(target, length_k_basis(Alphabet(m), 2));
    const double scale = blocks.H.squaredNorm();
    for (int n : {r, r + 2}) {
      const auto vars = solve_so(blocks, n);
      CHECK((vars.X.transpose() * vars.X - Matrix::Identity(n, n)).norm() <= 1e-10);
      CHECK(local_loss_value(blocks, vars) <= 1e-12 * scale);
      const auto wa = extract_wa_so(blocks, vars);
      CHECK(wfa::testing::max_deviation(target, wa, 6) <= 1e-8);
    }
  }
}

TEST_CASE("solve_so agrees with solve_given_X and svd_learn") {
  Rng rng(4);
  const Pnfa target = random_pnfa(4, 2, rng);
  const auto sample = sample_strings(target, 1000, rng);
  const auto blocks = empirical_blocks(sample, length_k_basis(Alphabet(2), 2), EstimatorKind::word);
  for (int n = 1; n <= 5; ++n) {
    const auto vars = solve_so(blocks, n);
    const auto fixed = solve_given_X(blocks, vars.X);
    CHECK((fixed.beta_inf - vars.beta_inf).norm() == 0.0);
    SoVariables via{vars.X, fixed.beta_inf, fixed.B};
    CHECK(std::abs(local_loss_value(blocks, via) - local_loss_value(blocks, vars)) <= 1e-10);

    const auto a = extract_wa_so(blocks, vars);
    const auto b = svd_learn(blocks, n);
    for (int i = 0; i < 100; ++i) {
      const Word w = wfa::testing::random_word(2, 8, rng);
      CHECK(std::abs(evaluate(a, w) - evaluate(b, w)) <= 1e-9);
    }
  }
}

TEST_CASE("solve_given_X with coordinate X on identity H") {
  Rng rng(5);
  HankelBlocks b;
  b.H = Matrix::Identity(4, 4);
  b.H_a = {wfa::testing::random_matrix(4, 4, rng)};
  const Matrix X = Matrix::Identity(4, 2);
  const auto sol = solve_given_X(b, X);
  CHECK((sol.beta_inf - b.col_lambda().head(2)).norm() <= 1e-15);
}

TEST_CASE("solve_given_X is a least-squares minimizer") {
  Rng rng(6);
  const auto b = wfa::testing::random_blocks(6, 5, 2, rng);
  const Eigen::HouseholderQR<Matrix> qr(wfa::testing::random_matrix(5, 3, rng));
  const Matrix X = qr.householderQ() * Matrix::Identity(5, 3);
  const auto sol = solve_given_X(b, X);
  const SoVariables best{X, sol.beta_inf, sol.B};
  const double opt = local_loss_value(b, best);
  std::normal_distribution<double> g(0.0, 1e-3);
  for (int t = 0; t < 100; ++t) {
    SoVariables p = best;
    for (Index i = 0; i < p.beta_inf.size(); ++i) p.beta_inf(i) += g(rng);
    for (auto& m : p.B)
      for (Index i = 0; i < m.size(); ++i) m.data()[i] += g(rng);
    CHECK(opt <= local_loss_value(b, p));
  }
}

TEST_CASE("solve_given_X preconditions") {
  Rng rng(7);
  const auto b = wfa::testing::random_blocks(4, 4, 2, rng);
  CHECK_THROWS_AS(solve_given_X(b, 2.0 * Matrix::Identity(4, 2)), InputError);
  CHECK_THROWS_AS(solve_given_X(b, Matrix::Identity(3, 2)), InputError);

  HankelBlocks z;
  z.H = Matrix::Zero(3, 3);
  z.H_a = {Matrix::Ones(3, 3)};
  const auto before = warning_count();
  const auto sol = solve_given_X(z, Matrix::Identity(3, 2));
  CHECK(warning_count() > before);
  CHECK(sol.beta_inf.isZero(0.0));
  CHECK(sol.B[0].isZero(0.0));
}

TEST_CASE("zero variables extract to the zero function") {
  Rng rng(8);
  const auto b = wfa::testing::random_blocks(3, 3, 2, rng);
  const auto wa = extract_wa_so(b, zero_vars(3, 2, 2));
  for (const auto& w : wfa::testing::all_words(2, 3)) CHECK(evaluate(wa, w) == 0.0);
}

TEST_CASE("the change of basis from Lemma 1's proof preserves f") {
  Rng rng(9);
  for (int t = 0; t < 10; ++t) {
    const int r = 2 + t % 3;
    const auto target = pnfa_to_wa(wfa::testing::random_rank_target(r, 2, rng));
    const Basis basis = length_k_basis(Alphabet(2), 2);
    const auto f = induced_factors(target, basis);
    const auto blocks = exact_blocks(target, basis);
    const auto s = linalg::svd(blocks.H);
    const Matrix Q = blocks.H * s.V.leftCols(r);
    const Matrix R = s.V.leftCols(r).transpose();
    // M = S R^+ and N = Q^+ P satisfy N M = I; N A M computes f.
    const Matrix M = f.S * linalg::pinv(R);
    const Matrix N = linalg::pinv(Q) * f.P;
    CHECK((N * M - Matrix::Identity(r, r)).norm() <= 1e-8);
    std::vector<Matrix> ops;
    for (const auto& a : target.ops()) ops.push_back(N * a * M);
    const WeightedAutomaton b(M.transpose() * target.alpha1(), N * target.alpha_inf(), ops);
    CHECK(wfa::testing::max_deviation(target, b, 5) <= 1e-8);
  }
}
