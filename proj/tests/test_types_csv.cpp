#include <doctest.h>

#include <fstream>

#include "core/csv.hpp"
#include "core/linalg.hpp"
#include "core/types.hpp"
#include "helpers.hpp"

using namespace kronmtl;

TEST_CASE("make_dataset rejects mismatched row counts") {
  CHECK_THROWS_AS(make_dataset(Matrix::Ones(4, 2), Matrix::Zero(5, 3)), Error);
  try {
    make_dataset(Matrix::Ones(4, 2), Matrix::Zero(5, 3));
  } catch (const Error& e) {
    CHECK(e.kind == ErrKind::config);
  }
}

TEST_CASE("center_columns centers the responses and records their means") {
  Rng rng(11);
  Dataset raw = testutil::rand_dataset(rng, 17, 4, 3);
  Dataset c = center_columns(raw);
  CHECK(c.centered);
  CHECK((c.X - raw.X).cwiseAbs().maxCoeff() == 0.0);  // design left alone
  CHECK(c.Y.colwise().sum().cwiseAbs().maxCoeff() < 1e-10);
  Matrix Y_back = c.Y.rowwise() + c.column_means.transpose();
  CHECK((Y_back - raw.Y).cwiseAbs().maxCoeff() < 1e-12);

  // Centering twice accumulates the means instead of losing them.
  Dataset cc = center_columns(c);
  CHECK((cc.column_means - c.column_means).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("validate_dataset flags a centered dataset with drifting columns") {
  Dataset d = make_dataset(Matrix::Ones(6, 2), Matrix::Ones(6, 2));
  d.centered = true;  // lie about it; column sums of Y are 6, not ~0
  d.column_means = Vector::Zero(2);
  CHECK_THROWS_AS(validate_dataset(d), Error);
}

TEST_CASE("require_spd_shape rejects asymmetry and wrong dims") {
  Matrix A = Matrix::Identity(3, 3);
  CHECK_NOTHROW(require_spd_shape(A, 3, "A"));
  CHECK_THROWS_AS(require_spd_shape(A, 4, "A"), Error);
  A(0, 1) = 0.5;  // asymmetric now
  CHECK_THROWS_AS(require_spd_shape(A, 3, "A"), Error);
  Matrix B = Matrix::Identity(2, 2);
  B(1, 1) = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(require_spd_shape(B, 2, "B"), Error);
}

TEST_CASE("csv round trip preserves doubles exactly") {
  Rng rng(3);
  Matrix M = rng.normal_matrix(7, 5);
  M(0, 0) = 1e-300;
  M(1, 1) = -0.1;  // not exactly representable; stresses the round trip
  testutil::TempDir tmp;
  const std::string path = tmp.file("m.csv");
  write_csv_matrix(path, M);
  Matrix R = read_csv_matrix(path);
  REQUIRE(R.rows() == M.rows());
  REQUIRE(R.cols() == M.cols());
  CHECK((R - M).cwiseAbs().maxCoeff() == 0.0);  // shortest round trip is exact
}

TEST_CASE("read_csv_matrix error classes") {
  testutil::TempDir tmp;
  // missing file is an io error
  try {
    read_csv_matrix(tmp.file("absent.csv"));
    CHECK(false);
  } catch (const Error& e) {
    CHECK(e.kind == ErrKind::io);
  }
  // ragged rows are a config error naming the line
  {
    std::ofstream out(tmp.file("ragged.csv"));
    out << "1,2,3\n4,5\n";
  }
  try {
    read_csv_matrix(tmp.file("ragged.csv"));
    CHECK(false);
  } catch (const Error& e) {
    CHECK(e.kind == ErrKind::config);
    CHECK(std::string(e.what()).find("ragged.csv") != std::string::npos);
  }
  // non-numeric cell
  {
    std::ofstream out(tmp.file("alpha.csv"));
    out << "1,x\n";
  }
  try {
    read_csv_matrix(tmp.file("alpha.csv"));
    CHECK(false);
  } catch (const Error& e) {
    CHECK(e.kind == ErrKind::config);
  }
}

TEST_CASE("format_double is stable and reparses to the same value") {
  const double xs[] = {0.0, -0.0, 1.0, 1e-17, -2.5, 3.141592653589793, 1e300};
  for (double x : xs) {
    const std::string s = format_double(x);
    CHECK(format_double(x) == s);
    CHECK(std::stod(s) == x);
  }
}

TEST_CASE("entry_variance is the population variance over all entries") {
  Matrix M(2, 2);
  M << 1, 2, 3, 4;  // mean 2.5, squared deviations 2.25+0.25+0.25+2.25 = 5
  CHECK(entry_variance(M) == doctest::Approx(1.25).epsilon(1e-12));
}

TEST_CASE("validate_hyperparams rejects negatives and bad sigma2") {
  Hyperparams hp;
  CHECK_NOTHROW(validate_hyperparams(hp));
  hp.gamma = -1.0;
  CHECK_THROWS_AS(validate_hyperparams(hp), Error);
  hp.gamma = 0.0;
  hp.sigma2 = 0.0;
  CHECK_THROWS_AS(validate_hyperparams(hp), Error);
}
