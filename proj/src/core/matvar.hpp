#pragma once

#include "core/types.hpp"

namespace kronmtl {

// Exact Gaussian posterior of vec(W) (column-stacked) under the separable
// prior vec(W) ~ N(0, C kron R) and likelihood Y ~ N(X W, sigma2 I):
//   Sigma_inv = C_inv kron R_inv + (1/sigma2) (I_K kron X^T X)
//   mu        = (1/sigma2) Sigma (I_K kron X^T) vec(Y)
// Dense D*K x D*K solve; refuses instances with D*K above the cap.
struct ExactPosterior {
  Vector mu;     // D*K
  Matrix Sigma;  // D*K x D*K
};
ExactPosterior exact_posterior(const Dataset& data, const PriorPrecisions& prior,
                               double sigma2, int max_dim = 4000);

// Joint objective driven downhill by the block updates. With the factored
// posterior (G, H nonzero):
//   J = denom * ln(sigma2)
//     + (1/sigma2) (|Y - X M|_F^2 + tr(X^T X G) tr(H))
//     + tr(R_inv G) tr(C_inv H) + tr(C_inv M^T R_inv M)
//     - K ln|G| - D ln|H| - K ln|R_inv| - D ln|C_inv|
//     + gamma |M|_* + K lambda_r |R_inv|_1 + D lambda_c |C_inv|_1
// where denom is N*D or N*K to match the noise update. In the degenerate
// state (G = H = 0) the trace couplings vanish and the ln|G|, ln|H| terms
// are dropped.
double joint_objective(const Dataset& data, const Posterior& post,
                       const PriorPrecisions& prior, const Hyperparams& hp,
                       Sigma2Denominator denom = Sigma2Denominator::nd);

// Mean per-row log density of the rows of Y under N(0, C_est).
double gaussian_holdout_loglik(const Matrix& Y, const Matrix& C_est);

}  // namespace kronmtl
