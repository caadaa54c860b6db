#pragma once

// Shared builders for the test suites. Oracles here stay deliberately naive:
// dense assembly, finite differences, exhaustive pair counting.

#include <filesystem>
#include <random>
#include <string>

#include "core/linalg.hpp"
#include "core/rng.hpp"
#include "core/types.hpp"

namespace testutil {

using kronmtl::Matrix;
using kronmtl::Vector;

inline Matrix rand_spd(kronmtl::Rng& rng, int p, double jitter = 0.5) {
  Matrix A = rng.normal_matrix(p, p);
  Matrix S = A * A.transpose() / static_cast<double>(p);
  S.diagonal().array() += jitter;
  kronmtl::symmetrize(S);
  return S;
}

inline kronmtl::Dataset rand_dataset(kronmtl::Rng& rng, int n, int d, int k) {
  return kronmtl::make_dataset(rng.normal_matrix(n, d), rng.normal_matrix(n, k));
}

// Central difference d/dM f(M), one entry at a time.
template <class F>
Matrix fd_gradient(const Matrix& M, F&& f, double h = 1e-5) {
  Matrix g(M.rows(), M.cols());
  Matrix P = M;
  for (int j = 0; j < M.cols(); ++j)
    for (int i = 0; i < M.rows(); ++i) {
      const double base = P(i, j);
      P(i, j) = base + h;
      const double up = f(P);
      P(i, j) = base - h;
      const double dn = f(P);
      P(i, j) = base;
      g(i, j) = (up - dn) / (2.0 * h);
    }
  return g;
}

inline double rel_err(const Matrix& got, const Matrix& want) {
  const double denom = want.norm();
  return (got - want).norm() / (denom > 0 ? denom : 1.0);
}

// Unique scratch directory under the system temp root, removed on scope exit.
class TempDir {
 public:
  TempDir() {
    static std::mt19937_64 eng{std::random_device{}()};
    const auto base = std::filesystem::temp_directory_path();
    path_ = (base / ("kronmtl_test_" + std::to_string(eng()))).string();
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::string& path() const { return path_; }
  std::string file(const std::string& name) const {
    return (std::filesystem::path(path_) / name).string();
  }

 private:
  std::string path_;
};

}  // namespace testutil
