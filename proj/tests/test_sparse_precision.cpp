#include <doctest.h>

#include "core/linalg.hpp"
#include "core/sparse_precision.hpp"
#include "helpers.hpp"

using namespace kronmtl;

namespace {

Posterior rand_posterior(Rng& rng, int d, int k) {
  Posterior p;
  p.M = rng.normal_matrix(d, k);
  p.G = testutil::rand_spd(rng, d);
  p.H = testutil::rand_spd(rng, k);
  return p;
}

}  // namespace

TEST_CASE("scatter surrogates match their formulas") {
  Rng rng(231);
  const int d = 5, k = 3;
  Posterior p = rand_posterior(rng, d, k);
  Matrix C_inv = testutil::rand_spd(rng, k);
  Matrix R_inv = testutil::rand_spd(rng, d);

  Matrix want_r = ((C_inv * p.H).trace() * p.G +
                   p.M * C_inv * p.M.transpose()) / static_cast<double>(k);
  Matrix want_c = ((R_inv * p.G).trace() * p.H +
                   p.M.transpose() * R_inv * p.M) / static_cast<double>(d);
  CHECK(testutil::rel_err(surrogate_row_cov(p, C_inv), want_r) < 1e-12);
  CHECK(testutil::rel_err(surrogate_col_cov(p, R_inv), want_c) < 1e-12);
}

TEST_CASE("scatter surrogates drop the covariance part when degenerate") {
  Rng rng(241);
  Posterior p;
  p.M = rng.normal_matrix(4, 3);
  p.G = Matrix::Zero(4, 4);
  p.H = Matrix::Zero(3, 3);
  Matrix C_inv = testutil::rand_spd(rng, 3);
  Matrix want = p.M * C_inv * p.M.transpose() / 3.0;
  CHECK(testutil::rel_err(surrogate_row_cov(p, C_inv), want) < 1e-12);
}

TEST_CASE("a fixed block passes through untouched") {
  Rng rng(251);
  Posterior p = rand_posterior(rng, 4, 3);
  Matrix R_fixed = testutil::rand_spd(rng, 4);
  Matrix C0 = Matrix::Identity(3, 3);
  auto r = update_precisions(p, R_fixed, C0, 0.3, 0.3, &R_fixed);
  CHECK((r.R_inv - R_fixed).cwiseAbs().maxCoeff() == 0.0);
  // The learned block solves its glasso problem against the fixed one.
  Matrix S_C = surrogate_col_cov(p, R_fixed);
  GlassoResult direct = glasso(S_C, 0.3);
  CHECK(testutil::rel_err(r.C_inv, direct.theta) < 1e-6);
}

TEST_CASE("alternating sweeps never increase the precision block value") {
  Rng rng(261);
  const int d = 4, k = 3;
  Posterior p = rand_posterior(rng, d, k);
  const double lr = 0.15, lc = 0.2;

  // Block value as seen by the updates, with both penalties included:
  // tr(R_inv G) tr(C_inv H) + tr(C_inv M' R_inv M) - K ln|R_inv| - D ln|C_inv|
  //   + K lr |R_inv|_1 + D lc |C_inv|_1.
  auto block = [&](const Matrix& R_inv, const Matrix& C_inv) {
    return (R_inv * p.G).trace() * (C_inv * p.H).trace() +
           (C_inv * p.M.transpose() * R_inv * p.M).trace() -
           k * logdet_spd(R_inv) - d * logdet_spd(C_inv) +
           k * lr * l1_norm(R_inv) + d * lc * l1_norm(C_inv);
  };

  Matrix R0 = Matrix::Identity(d, d), C0 = Matrix::Identity(k, k);
  auto r = update_precisions(p, R0, C0, lr, lc, nullptr);
  CHECK(r.converged);
  CHECK(block(r.R_inv, r.C_inv) <= block(R0, C0) + 1e-9);
  // Output blocks are symmetric positive definite.
  CHECK_NOTHROW(logdet_spd(r.R_inv));
  CHECK_NOTHROW(logdet_spd(r.C_inv));
}

TEST_CASE("zero penalties still produce invertible precisions via jitter") {
  Rng rng(271);
  Posterior p;
  p.M = rng.normal_matrix(5, 2);  // M C M^T is rank deficient for d > k
  p.G = Matrix::Zero(5, 5);
  p.H = Matrix::Zero(2, 2);
  Matrix R0 = Matrix::Identity(5, 5), C0 = Matrix::Identity(2, 2);
  auto r = update_precisions(p, R0, C0, 0.0, 0.0, nullptr);
  CHECK_NOTHROW(logdet_spd(r.R_inv));
  CHECK_NOTHROW(logdet_spd(r.C_inv));
}
