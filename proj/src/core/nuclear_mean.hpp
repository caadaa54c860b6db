#pragma once

#include "core/types.hpp"

namespace kronmtl {

struct MeanSolveConfig {
  double tol = 1e-8;       // relative objective change
  int max_iter = 5000;
  bool backtracking = false;  // default: fixed step 1/L from spectral norms
  double bt_shrink = 0.5;
  int bt_max_halvings = 60;
};

struct MeanSolveResult {
  Matrix M;
  double objective = 0.0;
  int iters = 0;
  bool converged = false;
};

// Proximal operator of tau * |.|_* : soft-thresholds the singular values.
Matrix svt_prox(const Matrix& A, double tau);

// Gradient of the smooth part
//   f0(M) = (1/sigma2) |Y - X M|_F^2 + tr(M^T R_inv M C_inv),
// namely (2/sigma2) X^T (X M - Y) + 2 R_inv M C_inv.
Matrix smooth_gradient(const Matrix& M, const Dataset& data,
                       const PriorPrecisions& prior, double sigma2);

// Precomputed pieces shared across iterations (and across repeated solves on
// the same design). R_inv / C_inv may be zero matrices, which drops the
// trace term entirely (used by the plain nuclear norm regression baseline).
struct MeanProblem {
  Matrix XtX;     // D x D
  Matrix XtY;     // D x K
  double ynorm2 = 0.0;
  Matrix R_inv;   // D x D, symmetric PSD
  Matrix C_inv;   // K x K, symmetric PSD
  double sigma2 = 1.0;
  double gamma = 0.0;
  double lipschitz = 0.0;  // filled by prepare()
};

MeanProblem make_mean_problem(const Dataset& data, const PriorPrecisions& prior,
                              double sigma2, double gamma);

// Full composite objective f0(M) + gamma |M|_*.
double mean_objective(const Matrix& M, const Dataset& data,
                      const PriorPrecisions& prior, double sigma2, double gamma);

// Accelerated proximal gradient descent on the composite objective. Momentum
// restarts whenever the objective would increase, so accepted objective
// values are non-increasing; with a warm start the first accepted value is
// no worse than the start. Convergence: relative objective change <= tol.
MeanSolveResult solve_mean(const MeanProblem& prob, const MeanSolveConfig& cfg = {},
                           const Matrix* warm_start = nullptr);

MeanSolveResult solve_mean(const Dataset& data, const PriorPrecisions& prior,
                           double sigma2, double gamma,
                           const MeanSolveConfig& cfg = {},
                           const Matrix* warm_start = nullptr);

}  // namespace kronmtl
