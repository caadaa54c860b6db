#include "core/glasso.hpp"

#include <limits>

#include "core/linalg.hpp"

namespace kronmtl {

namespace {

void check_s(const Matrix& S) {
  require(S.rows() == S.cols() && S.rows() >= 1, ErrKind::config,
          "glasso: S must be square");
  require(all_finite(S), ErrKind::config, "glasso: S must be finite");
  const double scale = S.cwiseAbs().maxCoeff();
  require((S - S.transpose()).cwiseAbs().maxCoeff() <= 1e-8 * (scale + 1.0),
          ErrKind::config, "glasso: S must be symmetric");
}

Matrix soft_matrix(const Matrix& A, double t, bool include_diag) {
  Matrix out = A;
  for (Eigen::Index j = 0; j < A.cols(); ++j)
    for (Eigen::Index i = 0; i < A.rows(); ++i)
      if (include_diag || i != j) out(i, j) = soft(A(i, j), t);
  return out;
}

}  // namespace

double glasso_objective(const Matrix& S, const Matrix& theta, double lambda,
                        bool diag_penalized) {
  double pen = l1_norm(theta);
  if (!diag_penalized) pen -= theta.diagonal().cwiseAbs().sum();
  return S.cwiseProduct(theta).sum() - logdet_spd(theta, "theta") + lambda * pen;
}

double glasso_kkt_residual(const Matrix& S, const Matrix& theta, double lambda,
                           bool diag_penalized) {
  const Matrix W = spd_inverse(theta, "theta");
  const double zero_tol = 1e-14 * std::max(1.0, theta.cwiseAbs().maxCoeff());
  double worst = 0.0;
  for (Eigen::Index j = 0; j < S.cols(); ++j) {
    for (Eigen::Index i = 0; i <= j; ++i) {
      const double g = S(i, j) - W(i, j);
      const double lam = (!diag_penalized && i == j) ? 0.0 : lambda;
      double r;
      if (std::abs(theta(i, j)) > zero_tol) {
        r = std::abs(g + lam * (theta(i, j) > 0.0 ? 1.0 : -1.0));
      } else {
        r = std::max(0.0, std::abs(g) - lam);
      }
      worst = std::max(worst, r);
    }
  }
  return worst;
}

GlassoResult glasso(const Matrix& S, double lambda, const GlassoConfig& cfg,
                    const Matrix* warm_start) {
  check_s(S);
  require(lambda >= 0.0 && std::isfinite(lambda), ErrKind::config,
          "glasso: lambda must be nonnegative");
  const Eigen::Index p = S.rows();

  GlassoResult out;
  if (lambda == 0.0) {
    Eigen::LLT<Matrix> llt(S);
    require(llt.info() == Eigen::Success, ErrKind::numeric,
            "glasso: lambda = 0 requires positive definite S");
    out.theta = llt.solve(Matrix::Identity(p, p));
    symmetrize(out.theta);
    out.kkt_residual = glasso_kkt_residual(S, out.theta, 0.0, cfg.diag_penalized);
    out.converged = true;
    return out;
  }

  const double scale = std::max(S.cwiseAbs().maxCoeff(), lambda);
  double rho = S.trace() / static_cast<double>(p) + lambda;

  Matrix Z;
  if (warm_start) {
    require(warm_start->rows() == p && warm_start->cols() == p,
            ErrKind::config, "glasso: warm start has wrong dimensions");
    Z = *warm_start;
    symmetrize(Z);
  } else {
    Z = Matrix::Zero(p, p);
    for (Eigen::Index i = 0; i < p; ++i)
      Z(i, i) = 1.0 / std::max(S(i, i) + lambda, 1e-8 * scale);
  }
  Matrix U = Matrix::Zero(p, p);
  Matrix Theta(p, p);

  double best_res = std::numeric_limits<double>::infinity();
  Matrix best = Z;

  for (int it = 1; it <= cfg.max_iter; ++it) {
    // log-det step: minimize tr(S T) - ln det T + (rho/2)|T - Z + U|^2,
    // solved in the eigenbasis of rho (Z - U) - S.
    Matrix A = rho * (Z - U) - S;
    symmetrize(A);
    Eigen::SelfAdjointEigenSolver<Matrix> es(A);
    require(es.info() == Eigen::Success, ErrKind::numeric,
            "glasso: eigendecomposition failed");
    Vector d = es.eigenvalues();
    for (Eigen::Index i = 0; i < p; ++i)
      d(i) = (d(i) + std::sqrt(d(i) * d(i) + 4.0 * rho)) / (2.0 * rho);
    Theta = es.eigenvectors() * d.asDiagonal() * es.eigenvectors().transpose();
    symmetrize(Theta);

    const Matrix Z_old = Z;
    Z = soft_matrix(Theta + U, lambda / rho, cfg.diag_penalized);
    symmetrize(Z);
    U += Theta - Z;

    out.iters = it;

    // The splitting variable carries the exact zeros; certify it directly.
    Eigen::LLT<Matrix> llt(Z);
    if (llt.info() == Eigen::Success) {
      const double res = glasso_kkt_residual(S, Z, lambda, cfg.diag_penalized);
      if (res < best_res) {
        best_res = res;
        best = Z;
      }
      if (res <= cfg.tol) {
        out.theta = Z;
        out.kkt_residual = res;
        out.converged = true;
        return out;
      }
    }

    const double prim = (Theta - Z).norm();
    const double dual = rho * (Z - Z_old).norm();
    if (prim > 10.0 * dual) {
      rho *= 2.0;
      U *= 0.5;
    } else if (dual > 10.0 * prim) {
      rho *= 0.5;
      U *= 2.0;
    }
  }

  require(std::isfinite(best_res), ErrKind::numeric,
          "glasso: no positive definite iterate found");
  out.theta = best;
  out.kkt_residual = best_res;
  out.converged = false;
  return out;
}

}  // namespace kronmtl
