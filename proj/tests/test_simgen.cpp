#include <doctest.h>

#include <cmath>
#include <fstream>

#include <Eigen/Eigenvalues>
#include <json.hpp>

#include "core/csv.hpp"
#include "core/linalg.hpp"
#include "core/simgen.hpp"
#include "helpers.hpp"

using namespace kronmtl;

TEST_CASE("gen_dataset is deterministic in the seed") {
  SimSpec spec;
  spec.n = 20;
  spec.d = 15;
  spec.k = 5;
  spec.seed = 99;
  SimData a = gen_dataset(spec);
  SimData b = gen_dataset(spec);
  CHECK((a.train.X - b.train.X).cwiseAbs().maxCoeff() == 0.0);
  CHECK((a.test.Y - b.test.Y).cwiseAbs().maxCoeff() == 0.0);
  CHECK((a.truth.W_true - b.truth.W_true).cwiseAbs().maxCoeff() == 0.0);
  CHECK(a.truth.sigma2_true == b.truth.sigma2_true);

  spec.seed = 100;
  SimData c = gen_dataset(spec);
  CHECK((a.train.X - c.train.X).cwiseAbs().maxCoeff() > 0.0);
}

TEST_CASE("chain laplacian matches a hand assembly for d = 3") {
  // Path 1-2-3: degrees (1, 2, 1). Normalized Laplacian:
  //   [ 1        -1/sqrt(2)  0        ]
  //   [-1/sqrt(2) 1         -1/sqrt(2)]
  //   [ 0        -1/sqrt(2)  1        ]
  const double ridge = 0.01;
  Matrix L = chain_laplacian(3, ridge);
  Matrix want(3, 3);
  const double w = -1.0 / std::sqrt(2.0);
  want << 1, w, 0, w, 1, w, 0, w, 1;
  want.diagonal().array() += ridge;
  CHECK(testutil::rel_err(L, want) < 1e-14);
}

TEST_CASE("chain laplacian smallest eigenvalue equals the ridge") {
  for (int d : {2, 5, 17}) {
    const double ridge = 0.01;
    Matrix L = chain_laplacian(d, ridge);
    Eigen::SelfAdjointEigenSolver<Matrix> es(L);
    CHECK(es.eigenvalues().minCoeff() == doctest::Approx(ridge).epsilon(1e-8));
    // Laplacian eigenvalues live in [0, 2], so with the ridge in [r, 2 + r].
    CHECK(es.eigenvalues().maxCoeff() <= 2.0 + ridge + 1e-12);
  }
}

TEST_CASE("pd_gram keeps its minimum eigenvalue at or above 1e-3") {
  Rng rng(361);
  for (int t = 0; t < 5; ++t) {
    Matrix U = rng.normal_matrix(4, 2);  // rank deficient gram
    Matrix S = pd_gram(U);
    Eigen::SelfAdjointEigenSolver<Matrix> es(S);
    CHECK(es.eigenvalues().minCoeff() >= 1e-3 - 1e-12);
  }
  Matrix Z = pd_gram(Matrix::Zero(3, 2));
  CHECK(testutil::rel_err(Z, 2e-3 * Matrix::Identity(3, 3)) < 1e-15);
}

TEST_CASE("gen_sparse_precision hits the density target and stays spd") {
  for (std::uint64_t seed : {1ull, 2ull, 3ull}) {
    SparsePrecision sp = gen_sparse_precision(10, 0.2, seed);
    CHECK(sp.density_reached);
    CHECK(std::abs(sp.realized_density - 0.2) <= 0.05 + 1e-12);
    CHECK((sp.value - sp.value.transpose()).cwiseAbs().maxCoeff() == 0.0);
    Eigen::LLT<Matrix> llt(sp.value);
    CHECK(llt.info() == Eigen::Success);
  }
}

TEST_CASE("design entries look like standard normals") {
  SimSpec spec;
  spec.n = 4000;
  spec.d = 3;
  spec.k = 2;
  spec.seed = 8;
  SimData data = gen_dataset(spec);
  // X entries are i.i.d. standard normal.
  const double m = data.train.X.mean();
  const double v = entry_variance(data.train.X);
  const double count = 4000.0 * 3.0;
  CHECK(std::abs(m) <= 4.0 / std::sqrt(count));
  CHECK(v >= 0.8);
  CHECK(v <= 1.2);
}

TEST_CASE("noise level realizes the requested signal to noise ratio") {
  SimSpec spec;
  spec.n = 2000;
  spec.d = 10;
  spec.k = 4;
  spec.rank = 2;
  spec.snr = 5.0;
  spec.seed = 17;
  SimData data = gen_dataset(spec);
  const Matrix signal = data.train.X * data.truth.W_true;
  CHECK(data.truth.sigma2_true ==
        doctest::Approx(entry_variance(signal) / 5.0).epsilon(1e-12));
  // Residual variance across the large sample should sit near sigma2_true.
  const double resid_var = entry_variance(Matrix(data.train.Y - signal));
  CHECK(resid_var / data.truth.sigma2_true > 0.9);
  CHECK(resid_var / data.truth.sigma2_true < 1.1);
}

TEST_CASE("low rank weights carry the row prior covariance") {
  // W = A B^T with the columns of A drawn from N(0, R) and those of B from
  // N(0, C), so E[W W^T] = tr(C) * rank * R = k * rank * R when C = I.
  Matrix R_inv(2, 2);
  R_inv << 2.0, 0.6, 0.6, 1.5;
  const Matrix R = spd_inverse(R_inv);
  const int k = 3, rank = 2, trials = 4000;
  Matrix acc = Matrix::Zero(2, 2);
  for (int t = 0; t < trials; ++t) {
    Matrix W = gen_lowrank_W(R_inv, Matrix::Identity(k, k), rank,
                             static_cast<std::uint64_t>(1000 + t));
    acc += W * W.transpose();
  }
  acc /= static_cast<double>(trials) * k * rank;
  CHECK(testutil::rel_err(acc, R) < 0.15);
}

TEST_CASE("low rank weights have the advertised rank") {
  SimSpec spec;
  spec.n = 10;
  spec.d = 12;
  spec.k = 6;
  spec.rank = 2;
  spec.seed = 5;
  SimData data = gen_dataset(spec);
  Eigen::BDCSVD<Matrix> svd(data.truth.W_true);
  int eff_rank = 0;
  for (int i = 0; i < svd.singularValues().size(); ++i)
    if (svd.singularValues()(i) > 1e-9 * svd.singularValues()(0)) ++eff_rank;
  CHECK(eff_rank == 2);
}

TEST_CASE("write_sim_files emits every artifact and a readable meta file") {
  SimSpec spec;
  spec.n = 8;
  spec.d = 6;
  spec.k = 3;
  spec.seed = 123;
  SimData data = gen_dataset(spec);
  testutil::TempDir tmp;
  write_sim_files(tmp.path(), spec, data);

  for (const char* name :
       {"X_train.csv", "Y_train.csv", "X_val.csv", "Y_val.csv", "X_test.csv",
        "Y_test.csv", "W_true.csv", "R_inv_true.csv", "C_inv_true.csv"}) {
    Matrix m = read_csv_matrix(tmp.file(name));
    CHECK(m.size() > 0);
  }
  Matrix w = read_csv_matrix(tmp.file("W_true.csv"));
  CHECK((w - data.truth.W_true).cwiseAbs().maxCoeff() == 0.0);

  std::ifstream meta(tmp.file("sim_meta.json"));
  REQUIRE(meta.good());
  nlohmann::json j = nlohmann::json::parse(meta);
  CHECK(j.at("seed").get<std::uint64_t>() == 123);
  CHECK(j.at("sigma2_true").get<double>() == data.truth.sigma2_true);
}

TEST_CASE("validate_spec rejects impossible shapes") {
  SimSpec spec;
  spec.rank = 50;  // exceeds min(d, k)
  spec.d = 10;
  spec.k = 4;
  CHECK_THROWS_AS(validate_spec(spec), Error);
  SimSpec neg;
  neg.snr = -1.0;
  CHECK_THROWS_AS(validate_spec(neg), Error);
}
