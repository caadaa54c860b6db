#pragma once

#include "core/types.hpp"

namespace kronmtl {

struct GlassoConfig {
  double tol = 1e-6;      // KKT certificate residual (sup norm)
  int max_iter = 2000;
  bool diag_penalized = true;
};

struct GlassoResult {
  Matrix theta;
  double kkt_residual = 0.0;
  int iters = 0;
  bool converged = false;
};

// min_Theta  tr(S Theta) - ln det Theta + lambda |Theta|_1  over SPD Theta.
// lambda = 0 requires S positive definite and returns its inverse directly.
// Otherwise an alternating-direction scheme runs: the log-det step is a
// closed-form eigenvalue map, the splitting step an elementwise soft
// threshold (which is what produces exact zeros), and iteration stops once
// the subgradient optimality certificate is within tol. warm_start, when
// given, seeds the splitting variable. A run that exhausts max_iter returns
// the best iterate with converged = false rather than failing.
GlassoResult glasso(const Matrix& S, double lambda, const GlassoConfig& cfg = {},
                    const Matrix* warm_start = nullptr);

double glasso_objective(const Matrix& S, const Matrix& theta, double lambda,
                        bool diag_penalized = true);

// Sup-norm residual of the stationarity condition S - Theta^{-1} + lambda Z = 0
// for the best admissible subgradient Z of |.|_1 at Theta: on entries of
// Theta that are zero the residual is the distance of S - Theta^{-1} from
// [-lambda, lambda]; on nonzero entries Z is forced to sign(Theta).
double glasso_kkt_residual(const Matrix& S, const Matrix& theta, double lambda,
                           bool diag_penalized = true);

}  // namespace kronmtl
