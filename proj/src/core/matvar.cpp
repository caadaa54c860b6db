#include "core/matvar.hpp"

#include "core/linalg.hpp"

namespace kronmtl {

ExactPosterior exact_posterior(const Dataset& data, const PriorPrecisions& prior,
                               double sigma2, int max_dim) {
  validate_dataset(data);
  const int d = data.d();
  const int k = data.k();
  require_spd_shape(prior.R_inv, d, "R_inv");
  require_spd_shape(prior.C_inv, k, "C_inv");
  require(sigma2 > 0.0 && std::isfinite(sigma2), ErrKind::config,
          "exact_posterior: sigma2 must be positive");
  require(static_cast<long long>(d) * k <= max_dim, ErrKind::config,
          "exact_posterior: D*K exceeds the dense solve cap");

  const Matrix XtX = data.X.transpose() * data.X;
  Matrix Sigma_inv = kron(prior.C_inv, prior.R_inv);
  for (int j = 0; j < k; ++j)
    Sigma_inv.block(j * d, j * d, d, d) += XtX / sigma2;
  symmetrize(Sigma_inv);

  Eigen::LLT<Matrix> llt(Sigma_inv);
  require(llt.info() == Eigen::Success, ErrKind::numeric,
          "exact_posterior: posterior precision not positive definite");

  // rhs = (1/sigma2) (I_K kron X^T) vec(Y): block j is X^T y_j / sigma2.
  const Matrix XtY = data.X.transpose() * data.Y;
  Vector rhs(d * k);
  for (int j = 0; j < k; ++j) rhs.segment(j * d, d) = XtY.col(j) / sigma2;

  ExactPosterior out;
  out.mu = llt.solve(rhs);
  out.Sigma = llt.solve(Matrix::Identity(d * k, d * k));
  symmetrize(out.Sigma);
  return out;
}

double joint_objective(const Dataset& data, const Posterior& post,
                       const PriorPrecisions& prior, const Hyperparams& hp,
                       Sigma2Denominator denom) {
  validate_dataset(data);
  validate_hyperparams(hp);
  const int n = data.n();
  const int d = data.d();
  const int k = data.k();
  require(post.M.rows() == d && post.M.cols() == k, ErrKind::config,
          "joint_objective: M has wrong dimensions");
  require_spd_shape(prior.R_inv, d, "R_inv");
  require_spd_shape(prior.C_inv, k, "C_inv");

  const bool degenerate = post.degenerate();
  if (!degenerate) {
    require_spd_shape(post.G, d, "G");
    require_spd_shape(post.H, k, "H");
  }

  const double denom_count =
      static_cast<double>(n) * (denom == Sigma2Denominator::nd ? d : k);

  double J = denom_count * std::log(hp.sigma2);
  const double resid2 = (data.Y - data.X * post.M).squaredNorm();
  J += resid2 / hp.sigma2;
  J += (prior.C_inv.cwiseProduct(post.M.transpose() * prior.R_inv * post.M)).sum();
  J -= k * logdet_spd(prior.R_inv, "R_inv");
  J -= d * logdet_spd(prior.C_inv, "C_inv");
  if (hp.gamma > 0.0) J += hp.gamma * nuclear_norm(post.M);
  J += k * hp.lambda_r * l1_norm(prior.R_inv);
  J += d * hp.lambda_c * l1_norm(prior.C_inv);

  if (!degenerate) {
    const Matrix XtX = data.X.transpose() * data.X;
    const double tr_XtXG = XtX.cwiseProduct(post.G).sum();
    const double tr_H = post.H.trace();
    J += tr_XtXG * tr_H / hp.sigma2;
    J += prior.R_inv.cwiseProduct(post.G).sum() *
         prior.C_inv.cwiseProduct(post.H).sum();
    J -= k * logdet_spd(post.G, "G");
    J -= d * logdet_spd(post.H, "H");
  }

  require(std::isfinite(J), ErrKind::numeric, "joint_objective: non-finite value");
  return J;
}

double gaussian_holdout_loglik(const Matrix& Y, const Matrix& C_est) {
  const int k = static_cast<int>(Y.cols());
  require(Y.rows() >= 1, ErrKind::config, "holdout loglik: Y must be nonempty");
  require(all_finite(Y), ErrKind::config, "holdout loglik: Y must be finite");
  require_spd_shape(C_est, k, "C_est");

  Eigen::LLT<Matrix> llt(C_est);
  require(llt.info() == Eigen::Success, ErrKind::numeric,
          "holdout loglik: C_est not positive definite");
  const double logdet =
      2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();

  constexpr double ln_two_pi = 1.8378770664093454835606594728112;
  double acc = 0.0;
  for (Eigen::Index i = 0; i < Y.rows(); ++i) {
    const Vector y = Y.row(i).transpose();
    acc += -0.5 * (k * ln_two_pi + logdet + y.dot(llt.solve(y)));
  }
  return acc / static_cast<double>(Y.rows());
}

}  // namespace kronmtl
