#include <doctest.h>

#include "core/linalg.hpp"
#include "core/matvar.hpp"
#include "core/nuclear_mean.hpp"
#include "helpers.hpp"

using namespace kronmtl;

TEST_CASE("svt_prox soft-thresholds singular values") {
  // Diagonal input: singular values are |diag| and the prox acts entrywise.
  Matrix M = Matrix::Zero(3, 3);
  M(0, 0) = 3.0;
  M(1, 1) = 1.0;
  M(2, 2) = 0.2;
  Matrix r = svt_prox(M, 0.5);
  CHECK(r(0, 0) == doctest::Approx(2.5).epsilon(1e-12));
  CHECK(r(1, 1) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(r(2, 2) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(nuclear_norm(r) == doctest::Approx(3.0).epsilon(1e-10));

  // Negative diagonal keeps its sign through the U, V conventions.
  Matrix N = Matrix::Constant(1, 1, -2.0);
  CHECK(svt_prox(N, 0.5)(0, 0) == doctest::Approx(-1.5).epsilon(1e-12));
}

TEST_CASE("smooth_gradient matches central differences") {
  Rng rng(61);
  for (int trial = 0; trial < 6; ++trial) {
    const int n = 10, d = 4, k = 3;
    Dataset data = testutil::rand_dataset(rng, n, d, k);
    PriorPrecisions prior{testutil::rand_spd(rng, d), testutil::rand_spd(rng, k)};
    const double sigma2 = 0.7;
    Matrix M = rng.normal_matrix(d, k);
    Matrix g = smooth_gradient(M, data, prior, sigma2);
    Matrix fd = testutil::fd_gradient(M, [&](const Matrix& P) {
      return (data.Y - data.X * P).squaredNorm() / sigma2 +
             (prior.C_inv * P.transpose() * prior.R_inv * P).trace();
    });
    CHECK(testutil::rel_err(g, fd) < 1e-6);
  }
}

TEST_CASE("solve_mean with no penalty recovers least squares on a tall design") {
  Rng rng(71);
  const int n = 30, d = 5, k = 4;
  Dataset data = testutil::rand_dataset(rng, n, d, k);
  PriorPrecisions prior;
  prior.R_inv = Matrix::Zero(d, d);
  prior.C_inv = Matrix::Zero(k, k);
  auto r = solve_mean(data, prior, 1.0, 0.0);
  const Matrix want =
      (data.X.transpose() * data.X).llt().solve(data.X.transpose() * data.Y);
  CHECK(r.converged);
  CHECK(testutil::rel_err(r.M, want) < 1e-6);
}

TEST_CASE("solve_mean with zero nuclear weight equals the exact posterior mean") {
  Rng rng(81);
  for (int trial = 0; trial < 5; ++trial) {
    const int n = 12, d = 4, k = 3;
    Dataset data = testutil::rand_dataset(rng, n, d, k);
    PriorPrecisions prior{testutil::rand_spd(rng, d), testutil::rand_spd(rng, k)};
    const double sigma2 = 0.4 + 0.1 * trial;
    MeanSolveConfig cfg;
    cfg.tol = 1e-12;
    auto r = solve_mean(data, prior, sigma2, 0.0, cfg);
    ExactPosterior ep = exact_posterior(data, prior, sigma2);
    Matrix want(d, k);
    for (int j = 0; j < k; ++j) want.col(j) = ep.mu.segment(j * d, d);
    CHECK(testutil::rel_err(r.M, want) < 1e-8);
  }
}

TEST_CASE("solve_mean satisfies the prox fixed point under a nuclear penalty") {
  Rng rng(91);
  const int n = 20, d = 6, k = 4;
  Dataset data = testutil::rand_dataset(rng, n, d, k);
  PriorPrecisions prior{testutil::rand_spd(rng, d), testutil::rand_spd(rng, k)};
  const double sigma2 = 0.9, gamma = 2.0;
  MeanSolveConfig cfg;
  cfg.tol = 1e-12;
  auto r = solve_mean(data, prior, sigma2, gamma, cfg);
  // At the optimum M = prox_{gamma/L}(M - grad/L) for the solver's step 1/L.
  MeanProblem prob = make_mean_problem(data, prior, sigma2, gamma);
  const double L = prob.lipschitz;
  const Matrix g = smooth_gradient(r.M, data, prior, sigma2);
  const Matrix back = svt_prox(r.M - g / L, gamma / L);
  CHECK((back - r.M).norm() < 1e-5 * (1.0 + r.M.norm()));
}

TEST_CASE("a large nuclear weight collapses the mean to zero") {
  Rng rng(101);
  Dataset data = testutil::rand_dataset(rng, 15, 4, 3);
  PriorPrecisions prior;
  prior.R_inv = Matrix::Zero(4, 4);
  prior.C_inv = Matrix::Zero(3, 3);
  // gamma beyond the dual norm of the gradient at zero forces M = 0.
  const double gate = 2.0 * (data.X.transpose() * data.Y).norm();
  auto r = solve_mean(data, prior, 1.0, gate * 2.0);
  CHECK(r.M.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("solve_mean objective never increases from a warm start") {
  Rng rng(111);
  Dataset data = testutil::rand_dataset(rng, 18, 5, 4);
  PriorPrecisions prior{testutil::rand_spd(rng, 5), testutil::rand_spd(rng, 4)};
  auto cold = solve_mean(data, prior, 1.0, 1.0);
  // Re-solve at a slightly different weight, warm-started.
  const double j_at_warm = mean_objective(cold.M, data, prior, 1.0, 1.3);
  MeanProblem prob = make_mean_problem(data, prior, 1.0, 1.3);
  auto warm = solve_mean(prob, MeanSolveConfig{}, &cold.M);
  CHECK(warm.objective <= j_at_warm + 1e-9 * (1.0 + std::abs(j_at_warm)));
}

TEST_CASE("mean_objective matches a direct evaluation") {
  Rng rng(121);
  Dataset data = testutil::rand_dataset(rng, 9, 3, 2);
  PriorPrecisions prior{testutil::rand_spd(rng, 3), testutil::rand_spd(rng, 2)};
  const double sigma2 = 0.6, gamma = 0.8;
  Matrix M = rng.normal_matrix(3, 2);
  const double want = (data.Y - data.X * M).squaredNorm() / sigma2 +
                      (prior.C_inv * M.transpose() * prior.R_inv * M).trace() +
                      gamma * nuclear_norm(M);
  CHECK(mean_objective(M, data, prior, sigma2, gamma) ==
        doctest::Approx(want).epsilon(1e-10));
}
