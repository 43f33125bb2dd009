#include "doctest.h"

#include <algorithm>
#include <cmath>

#include "support.hpp"
#include "wfa/convex_opt.hpp"
#include "wfa/linalg.hpp"
#include "wfa/local_loss.hpp"

using namespace wfa;

namespace {

double naive_nuclear(const Matrix& m) {
  Eigen::JacobiSVD<Matrix> svd(m);
  return svd.singularValues().sum();
}

double naive_relaxed(const HankelBlocks& b, const Matrix& B, double tau) {
  Matrix hs(b.H.rows(), b.H.cols() * b.alphabet_size());
  for (int a = 0; a < b.alphabet_size(); ++a) hs.middleCols(a * b.H.cols(), b.H.cols()) = b.H_a[a];
  double r = 0.0;
  const Matrix res = b.H * B - hs;
  for (Index i = 0; i < res.size(); ++i) r += res.data()[i] * res.data()[i];
  return naive_nuclear(B) + tau * r;
}

// Exact blocks of a weighted automaton with O(1) weights on a suffix set of
// rank size, so H has full column rank and is well conditioned.
HankelBlocks full_column_rank_blocks(Rng& rng) {
  std::vector<Matrix> ops{wfa::testing::random_matrix(3, 3, rng, 0.3), wfa::testing::random_matrix(3, 3, rng, 0.3)};
  const WeightedAutomaton wa(wfa::testing::random_matrix(3, 1, rng), wfa::testing::random_matrix(3, 1, rng), ops);
  return exact_blocks(wa, Basis(length_k_basis(Alphabet(2), 2).prefixes(), {{}, {0}, {1}}));
}

}  // namespace

TEST_CASE("relaxed loss") {
  Rng rng(1);
  const auto b = wfa::testing::random_blocks(4, 3, 2, rng);
  const double tau = 2.5;
  CHECK(relaxed_loss(b, Matrix::Zero(3, 6), tau) == doctest::Approx(tau * b.h_sigma().squaredNorm()));
  for (int t = 0; t < 20; ++t) {
    const Matrix B = wfa::testing::random_matrix(3, 6, rng);
    CHECK(std::abs(relaxed_loss(b, B, tau) - naive_relaxed(b, B, tau)) <= 1e-12 * naive_relaxed(b, B, tau));
  }
  HankelBlocks id;
  id.H = Matrix::Identity(3, 3);
  id.H_a = {wfa::testing::random_matrix(3, 3, rng), wfa::testing::random_matrix(3, 3, rng)};
  CHECK(relaxed_loss(id, id.h_sigma(), 7.0) == doctest::Approx(naive_nuclear(id.h_sigma())).epsilon(1e-14));
  CHECK_THROWS_AS(relaxed_loss(b, Matrix::Zero(3, 5), tau), InputError);
}

TEST_CASE("gradient matches finite differences") {
  Rng rng(2);
  const auto b = wfa::testing::random_blocks(4, 3, 2, rng);
  const Matrix B = wfa::testing::random_matrix(3, 6, rng);
  const double tau = 1.5;
  const Matrix g = relaxed_loss_gradient(b, B, tau);
  auto smooth = [&](const Matrix& x) { return tau * (b.H * x - b.h_sigma()).squaredNorm(); };
  const double h = 1e-6;
  for (Index i = 0; i < B.size(); ++i) {
    Matrix up = B, dn = B;
    up.data()[i] += h;
    dn.data()[i] -= h;
    CHECK(g.data()[i] == doctest::Approx((smooth(up) - smooth(dn)) / (2 * h)).epsilon(1e-6));
  }
}

TEST_CASE("singular value thresholding") {
  Matrix d = Matrix::Zero(2, 2);
  d.diagonal() << 3.0, 1.0;
  Matrix e = Matrix::Zero(2, 2);
  e(0, 0) = 1.0;
  CHECK((svt(d, 2.0) - e).norm() <= 1e-12);

  Rng rng(3);
  const Matrix m = wfa::testing::random_matrix(4, 6, rng);
  CHECK((svt(m, 0.0) - m).norm() <= 1e-12);
  CHECK(svt(m, linalg::spectral_norm(m) * 1.01).isZero(0.0));
  CHECK_THROWS_AS(svt(m, -1.0), InputError);

  // Independent oracle: shrink the singular values of a JacobiSVD.
  for (int t = 0; t < 100; ++t) {
    const Matrix x = wfa::testing::random_matrix(3 + t % 4, 2 + t % 5, rng);
    const double gamma = 0.5 * (t % 5);
    Eigen::JacobiSVD<Matrix> j(x, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const Vector shrunk = (j.singularValues().array() - gamma).max(0.0).matrix();
    const Matrix oracle = j.matrixU() * shrunk.asDiagonal() * j.matrixV().transpose();
    CHECK((svt(x, gamma) - oracle).cwiseAbs().maxCoeff() <= 1e-12);
  }
}

TEST_CASE("svt is the proximal operator of the nuclear norm") {
  Rng rng(4);
  for (int t = 0; t < 10; ++t) {
    const Matrix m = wfa::testing::random_matrix(4, 5, rng);
    const double gamma = 0.3 + 0.2 * t;
    auto objective = [&](const Matrix& z) { return gamma * naive_nuclear(z) + 0.5 * (z - m).squaredNorm(); };
    const Matrix z = svt(m, gamma);
    const double best = objective(z);
    for (double scale : {1e-2, 1e-3}) {
      for (int k = 0; k < 100; ++k) {
        CHECK(best <= objective(z + wfa::testing::random_matrix(4, 5, rng, scale)) + 1e-14);
      }
    }
  }
}

TEST_CASE("solve_co on zero blocks") {
  HankelBlocks z;
  z.H = Matrix::Zero(3, 3);
  z.H_a = {Matrix::Zero(3, 3), Matrix::Zero(3, 3)};
  const auto sol = solve_co(z, CoConfig{});
  CHECK(sol.iterations == 0);
  CHECK(sol.converged);
  CHECK(sol.B_sigma.isZero(0.0));
  CHECK(sol.B_sigma.cols() == 6);
}

TEST_CASE("solve_co descent and fixed point") {
  Rng rng(5);
  for (int t = 0; t < 10; ++t) {
    const Pnfa target = random_pnfa(4, 2, rng);
    const auto blocks = empirical_blocks(sample_strings(target, 2000, rng),
                                         length_k_basis(Alphabet(2), 1 + t % 2), EstimatorKind::word);
    for (double tau : {1.0, 100.0, 1e4}) {
      for (bool accel : {true, false}) {
        CoConfig cfg;
        cfg.tau = tau;
        cfg.acceleration = accel;
        cfg.max_iter = 20000;
        const auto sol = solve_co(blocks, cfg);
        REQUIRE(!sol.objective_trace.empty());
        for (std::size_t k = 1; k < sol.objective_trace.size(); ++k) {
          CHECK(sol.objective_trace[k] <= sol.objective_trace[k - 1]);
        }
        const Index s = blocks.n_suffixes();
        CHECK(sol.objective_trace.back() <= relaxed_loss(blocks, Matrix::Zero(s, 2 * s), tau));
        CHECK(sol.objective_trace.back() == doctest::Approx(relaxed_loss(blocks, sol.B_sigma, tau)).epsilon(1e-12));
        CHECK(sol.step == doctest::Approx(1.0 / (2 * tau * std::pow(linalg::spectral_norm(blocks.H), 2))));
        if (sol.converged) {
          const Matrix& B = sol.B_sigma;
          const Matrix next = svt(B - sol.step * relaxed_loss_gradient(blocks, B, tau), sol.step);
          CHECK((B - next).norm() <= 1e-6 * (1.0 + B.norm()));
        }
      }
    }
  }
}

TEST_CASE("the first plain iterate from zero") {
  Rng rng(6);
  const auto b = wfa::testing::random_blocks(4, 3, 2, rng);
  CoConfig cfg;
  cfg.tau = 3.0;
  cfg.max_iter = 1;
  cfg.acceleration = false;
  const auto sol = solve_co(b, cfg);
  const double gamma = sol.step;
  const Matrix expect = svt(2 * cfg.tau * gamma * b.H.transpose() * b.h_sigma(), gamma);
  CHECK((sol.B_sigma - expect).norm() <= 1e-12 * (1 + expect.norm()));
}

TEST_CASE("CoConfig validation") {
  Rng rng(7);
  const auto b = wfa::testing::random_blocks(3, 3, 1, rng);
  CoConfig c;
  c.tau = 0.0;
  CHECK_THROWS_AS(solve_co(b, c), InputError);
  c.tau = 1.0;
  c.max_iter = 0;
  CHECK_THROWS_AS(solve_co(b, c), InputError);
}

TEST_CASE("closed form") {
  Rng rng(8);
  SUBCASE("H = I") {
    HankelBlocks id;
    id.H = Matrix::Identity(3, 3);
    id.H_a = {wfa::testing::random_matrix(3, 3, rng), wfa::testing::random_matrix(3, 3, rng)};
    const Matrix B = closed_form_infinite_tau(id);
    CHECK((id.H * B - id.h_sigma()).norm() <= 1e-12);
    CHECK(linalg::nuclear_norm(B) <= linalg::nuclear_norm(id.h_sigma()) + 1e-9);
  }
  SUBCASE("exact blocks satisfy the constraint and recover f") {
    for (int t = 0; t < 10; ++t) {
      const int r = 2 + t % 4;
      const auto target = pnfa_to_wa(wfa::testing::random_rank_target(r, 2, rng));
      const auto blocks = exact_blocks(target, length_k_basis(Alphabet(2), 2));
      const Matrix B = closed_form_infinite_tau(blocks);
      CHECK((blocks.H * B - blocks.h_sigma()).norm() <= 1e-8 * blocks.h_sigma().norm());
      CHECK(wfa::testing::max_deviation(target, extract_wa_co(blocks, B), 6) <= 1e-6);
      const Matrix scaled = closed_form_infinite_tau(blocks.scaled(7.5));
      CHECK((scaled - B).norm() <= 1e-10 * (1 + B.norm()));
    }
  }
  SUBCASE("rank hypothesis") {
    HankelBlocks bad;
    bad.H = Matrix::Zero(3, 3);
    bad.H(0, 0) = 1.0;
    bad.H_a = {Matrix::Identity(3, 3)};
    CHECK_THROWS_AS(closed_form_infinite_tau(bad), NumericError);
    try {
      closed_form_infinite_tau(bad);
    } catch (const NumericError& e) {
      const std::string what = e.what();
      CHECK(what.find("rank(H) = 1") != std::string::npos);
      CHECK(what.find('3') != std::string::npos);
    }
  }
}

TEST_CASE("large tau approaches the closed form") {
  Rng rng(9);
  for (int t = 0; t < 5; ++t) {
    const auto blocks = full_column_rank_blocks(rng);
    REQUIRE(numerical_rank(blocks.H) == blocks.n_suffixes());
    const Matrix cf = closed_form_infinite_tau(blocks);
    CoConfig cfg;
    cfg.tau = 1e6;
    cfg.max_iter = 100000;
    cfg.rel_tol = 1e-14;
    const double gap6 = (solve_co(blocks, cfg).B_sigma - cf).norm();
    CHECK(gap6 <= 1e-3);
    // The approach is first order in 1 / tau.
    cfg.tau = 1e7;
    const double gap7 = (solve_co(blocks, cfg).B_sigma - cf).norm();
    CHECK(gap7 / gap6 == doctest::Approx(0.1).epsilon(0.1));
  }
}

TEST_CASE("distinct starts reach the same solution under full column rank") {
  Rng rng(10);
  const auto blocks = wfa::testing::random_blocks(6, 3, 2, rng);
  CoConfig cfg;
  cfg.tau = 10.0;
  cfg.max_iter = 50000;
  cfg.rel_tol = 1e-15;
  const auto a = solve_co(blocks, cfg, wfa::testing::random_matrix(3, 6, rng));
  const auto b = solve_co(blocks, cfg, wfa::testing::random_matrix(3, 6, rng, 5.0));
  CHECK((a.B_sigma - b.B_sigma).norm() <= 1e-4);
}

TEST_CASE("local loss at the relaxed optimum is bounded by the relaxed loss") {
  Rng rng(11);
  const Pnfa target = random_pnfa(3, 2, rng);
  const auto blocks = empirical_blocks(sample_strings(target, 1000, rng), length_k_basis(Alphabet(2), 1),
                                       EstimatorKind::word);
  const Index s = blocks.n_suffixes();
  for (double tau : {1.0, 10.0, 1e3}) {
    CoConfig cfg;
    cfg.tau = tau;
    const auto sol = solve_co(blocks, cfg);
    Vector e = Vector::Zero(s);
    e(blocks.lambda_col) = 1.0;
    const SoVariables vars{Matrix::Identity(s, s), e, linalg::hsplit(sol.B_sigma, 2)};
    CHECK(local_loss_value(blocks, vars) <= relaxed_loss(blocks, sol.B_sigma, tau) + 1e-9);
  }
}

TEST_CASE("extract_wa_co") {
  Rng rng(12);
  const auto blocks = wfa::testing::random_blocks(3, 3, 2, rng);
  const auto zero = extract_wa_co(blocks, Matrix::Zero(3, 6));
  CHECK(evaluate(zero, {}) == blocks.H(0, 0));
  CHECK(evaluate(zero, {1}) == 0.0);
  const Matrix B = wfa::testing::random_matrix(3, 6, rng);
  const auto wa = extract_wa_co(blocks, B);
  CHECK(linalg::hconcat(wa.ops()) == B);
  CHECK(wa.n_states() == 3);
}

TEST_CASE("nuclear norm grows along the regularization path") {
  Rng rng(13);
  int monotone = 0;
  const int seeds = 7;
  for (int t = 0; t < seeds; ++t) {
    const Pnfa target = random_pnfa(3, 2, rng);
    const auto blocks = empirical_blocks(sample_strings(target, 2000, rng), length_k_basis(Alphabet(2), 1),
                                         EstimatorKind::word);
    double last = -1.0;
    bool ok = true;
    for (double tau : default_tau_grid()) {
      CoConfig cfg;
      cfg.tau = tau;
      cfg.max_iter = 20000;
      cfg.rel_tol = 1e-12;
      const double nn = linalg::nuclear_norm(solve_co(blocks, cfg).B_sigma);
      if (nn < last - 1e-6 * (1 + last)) ok = false;
      last = nn;
    }
    monotone += ok;
  }
  CHECK(monotone * 2 > seeds);
}
