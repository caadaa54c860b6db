#pragma once

#include "core/glasso.hpp"
#include "core/types.hpp"

namespace kronmtl {

// Scatter surrogates that reduce the precision blocks of the joint objective
// to graphical lasso problems:
//   S_R = (tr(C_inv H) G + M C_inv M^T) / K   (D x D)
//   S_C = (tr(R_inv G) H + M^T R_inv M) / D   (K x K)
// In the degenerate state (G = H = 0) the first summand vanishes.
Matrix surrogate_row_cov(const Posterior& post, const Matrix& C_inv);
Matrix surrogate_col_cov(const Posterior& post, const Matrix& R_inv);

struct PrecisionUpdateConfig {
  double tol = 1e-6;   // relative change of the precision block value
  int max_sweeps = 50;
  GlassoConfig glasso;
};

struct PrecisionUpdateResult {
  Matrix R_inv;
  Matrix C_inv;
  int sweeps = 0;
  bool converged = false;
};

// Alternates glasso solves of the two blocks starting from (R_inv0, C_inv0).
// When fixed_R_inv (resp. fixed_C_inv) is given that block is skipped and
// the matrix is passed through untouched. A candidate that fails to improve
// its block value (possible near a fixed point, since glasso stops at a
// certificate tolerance) is discarded in favor of the current iterate, so
// the block value never increases. For lambda = 0 the surrogate may be
// singular; a jitter of 1e-10 tr(S)/P is added on that path only.
PrecisionUpdateResult update_precisions(const Posterior& post, const Matrix& R_inv0,
                                        const Matrix& C_inv0, double lambda_r,
                                        double lambda_c, const Matrix* fixed_R_inv,
                                        const PrecisionUpdateConfig& cfg = {},
                                        const Matrix* fixed_C_inv = nullptr);

}  // namespace kronmtl
