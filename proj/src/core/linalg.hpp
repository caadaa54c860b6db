#pragma once

#include <Eigen/Dense>
#include <cmath>

#include "core/types.hpp"

namespace kronmtl {

inline bool all_finite(const Matrix& A) { return A.allFinite(); }

inline void symmetrize(Matrix& A) { A = ((A + A.transpose()) * 0.5).eval(); }

inline double soft(double x, double t) {
  if (x > t) return x - t;
  if (x < -t) return x + t;
  return 0.0;
}

inline double l1_norm(const Matrix& A) { return A.cwiseAbs().sum(); }

// Population variance over all entries.
inline double entry_variance(const Matrix& A) {
  const double n = static_cast<double>(A.size());
  const double mean = A.sum() / n;
  return (A.array() - mean).square().sum() / n;
}

// Kronecker product, column-major convention: (A kron B)(i*p+k, j*q+l) =
// A(i,j) * B(k,l) for B of size p x q. Matches vec(B X A^T) = (A kron B) vec(X)
// with column-stacking vec.
inline Matrix kron(const Matrix& A, const Matrix& B) {
  Matrix out(A.rows() * B.rows(), A.cols() * B.cols());
  for (Eigen::Index j = 0; j < A.cols(); ++j)
    for (Eigen::Index i = 0; i < A.rows(); ++i)
      out.block(i * B.rows(), j * B.cols(), B.rows(), B.cols()) = A(i, j) * B;
  return out;
}

// log det of a symmetric positive definite matrix via Cholesky.
inline double logdet_spd(const Matrix& A, const char* what = "matrix") {
  Eigen::LLT<Matrix> llt(A);
  require(llt.info() == Eigen::Success, ErrKind::numeric,
          std::string(what) + ": not positive definite");
  return 2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
}

inline Matrix spd_inverse(const Matrix& A, const char* what = "matrix") {
  Eigen::LLT<Matrix> llt(A);
  require(llt.info() == Eigen::Success, ErrKind::numeric,
          std::string(what) + ": not positive definite");
  Matrix inv = llt.solve(Matrix::Identity(A.rows(), A.cols()));
  symmetrize(inv);
  return inv;
}

// Largest eigenvalue of a symmetric PSD matrix by power iteration.
// Deterministic start vector; converges when successive Rayleigh quotients
// agree to rel_tol or the iteration cap is reached.
inline double spectral_norm_spd(const Matrix& A, double rel_tol = 1e-10,
                                int max_iter = 1000) {
  const Eigen::Index n = A.rows();
  if (n == 0) return 0.0;
  Vector v(n);
  for (Eigen::Index i = 0; i < n; ++i) v(i) = 1.0 + 0.1 * std::sin(double(i + 1));
  v.normalize();
  double lam = 0.0;
  for (int it = 0; it < max_iter; ++it) {
    Vector w = A * v;
    const double nw = w.norm();
    if (nw == 0.0) return 0.0;
    v = w / nw;
    const double lam_new = v.dot(A * v);
    if (std::abs(lam_new - lam) <= rel_tol * std::max(1.0, std::abs(lam_new))) {
      return lam_new;
    }
    lam = lam_new;
  }
  return lam;
}

inline double nuclear_norm(const Matrix& A) {
  Eigen::BDCSVD<Matrix> svd(A);
  return svd.singularValues().sum();
}

}  // namespace kronmtl
