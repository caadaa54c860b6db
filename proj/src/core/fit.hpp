#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "core/kron_posterior.hpp"
#include "core/nuclear_mean.hpp"
#include "core/sparse_precision.hpp"
#include "core/types.hpp"

namespace kronmtl {

// mvg:      point posterior (G = H = 0), no nuclear penalty.
// mvg-corr: factored covariance, no nuclear penalty.
// mvg-rank: factored covariance plus nuclear penalty on the mean.
enum class Variant { mvg, mvg_corr, mvg_rank };

const char* variant_name(Variant v);
Variant variant_from_name(const std::string& name);

struct FitConfig {
  Variant variant = Variant::mvg_rank;
  std::optional<Matrix> fixed_row_precision;
  std::optional<Matrix> fixed_col_precision;
  double outer_tol = 1e-6;
  int outer_max_iter = 100;
  MeanSolveConfig mean;
  CovConfig cov;
  PrecisionUpdateConfig prec;
  std::optional<double> sigma2_init;  // default: entry variance of Y (1.0 if zero)
  bool fix_sigma2 = false;
  Sigma2Denominator sigma2_denominator = Sigma2Denominator::nd;
  int exact_posterior_cap = 4000;
  std::uint64_t seed = 0;  // reserved; fitting itself draws no random numbers
};

struct Sigma2Update {
  double sigma2 = 0.0;
  bool clamped = false;  // numerator was <= 0; value clamped to 1e-12
};

// sigma2 = (|Y - X M|_F^2 + tr(X^T X G) tr(H)) / denom with denom = N*D or
// N*K. The trace term vanishes in the degenerate state.
Sigma2Update update_sigma2(const Dataset& data, const Posterior& post,
                           Sigma2Denominator denom = Sigma2Denominator::nd);

struct FitReport {
  std::vector<double> objective_trace;  // joint objective after each outer pass
  int outer_iters = 0;
  bool converged = false;
  bool sigma2_clamped = false;
  std::vector<int> mean_iters;
  std::vector<int> cov_iters;
  std::vector<int> prec_sweeps;
  double elapsed_seconds = 0.0;
};

struct FitResult {
  Posterior post;
  PriorPrecisions prior;
  Hyperparams hp;
  FitReport report;
};

// Shared immutable precomputations for repeated fits on one design matrix
// (grid searches): the Gram matrix and, when the row precision is fixed,
// the covariance solver basis.
struct FitWorkspace {
  Matrix XtX;
  Matrix XtY;
  double ynorm2 = 0.0;
  double spec_norm_XtX = 0.0;
  CovarianceSolver cov;
  bool cov_basis_for_fixed_row = false;
};
FitWorkspace make_fit_workspace(const Dataset& data, const FitConfig& cfg);

// Block coordinate descent on the joint objective:
//   mean -> covariance factors -> precisions -> noise
// until the relative objective change is below outer_tol. Warm starts keep
// every block a descent step, so the recorded trace is non-increasing.
// Running out of iterations only clears the converged flag.
FitResult fit(const Dataset& data, const Hyperparams& hp0, const FitConfig& cfg = {},
              const FitWorkspace* shared = nullptr);

// X_new * M, adding back stored column means when the model was trained on
// column-centered responses.
Matrix predict(const Matrix& M, const Matrix& X_new, const Vector& column_means,
               bool centered);

}  // namespace kronmtl
