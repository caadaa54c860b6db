#include "core/sparse_precision.hpp"

#include "core/linalg.hpp"

namespace kronmtl {

namespace {

Matrix jittered(const Matrix& S) {
  const double eps = 1e-10 * S.trace() / static_cast<double>(S.rows());
  return S + eps * Matrix::Identity(S.rows(), S.cols());
}

// One block solve with monotone acceptance. The solver sees a jittered S
// when lambda = 0 (keeps the lasso subproblems well posed on a singular
// surrogate), but acceptance compares the block objective on the true S so
// the step can never increase the joint objective.
void solve_block(const Matrix& S, double lambda, const GlassoConfig& gcfg,
                 Matrix& current, bool& converged_all) {
  const Matrix S_eff = (lambda == 0.0) ? jittered(S) : S;
  GlassoResult res = glasso(S_eff, lambda, gcfg, &current);
  converged_all = converged_all && res.converged;
  const double now = glasso_objective(S, current, lambda, gcfg.diag_penalized);
  const double cand = glasso_objective(S, res.theta, lambda, gcfg.diag_penalized);
  if (cand < now) current = std::move(res.theta);
}

}  // namespace

Matrix surrogate_row_cov(const Posterior& post, const Matrix& C_inv) {
  const int k = static_cast<int>(post.M.cols());
  require_spd_shape(C_inv, k, "C_inv");
  Matrix S = post.M * C_inv * post.M.transpose();
  if (!post.degenerate()) S += C_inv.cwiseProduct(post.H).sum() * post.G;
  S /= static_cast<double>(k);
  symmetrize(S);
  return S;
}

Matrix surrogate_col_cov(const Posterior& post, const Matrix& R_inv) {
  const int d = static_cast<int>(post.M.rows());
  require_spd_shape(R_inv, d, "R_inv");
  Matrix S = post.M.transpose() * R_inv * post.M;
  if (!post.degenerate()) S += R_inv.cwiseProduct(post.G).sum() * post.H;
  S /= static_cast<double>(d);
  symmetrize(S);
  return S;
}

PrecisionUpdateResult update_precisions(const Posterior& post, const Matrix& R_inv0,
                                        const Matrix& C_inv0, double lambda_r,
                                        double lambda_c, const Matrix* fixed_R_inv,
                                        const PrecisionUpdateConfig& cfg,
                                        const Matrix* fixed_C_inv) {
  const int d = static_cast<int>(post.M.rows());
  const int k = static_cast<int>(post.M.cols());
  require(lambda_r >= 0.0 && lambda_c >= 0.0, ErrKind::config,
          "update_precisions: penalties must be nonnegative");

  PrecisionUpdateResult out;
  out.R_inv = fixed_R_inv ? *fixed_R_inv : R_inv0;
  out.C_inv = fixed_C_inv ? *fixed_C_inv : C_inv0;
  require_spd_shape(out.R_inv, d, "R_inv");
  require_spd_shape(out.C_inv, k, "C_inv");
  if (fixed_R_inv && fixed_C_inv) {
    out.sweeps = 0;
    out.converged = true;
    return out;
  }

  // Block value: K [tr(Theta_R S_R) - ln|Theta_R| + lambda_r |Theta_R|_1]
  // plus the C analogue equals the precision part of the joint objective up
  // to constants; tracking the glasso objectives of both blocks is enough
  // for the stopping rule.
  const auto block_value = [&](const Matrix& R_inv, const Matrix& C_inv) {
    return static_cast<double>(k) *
               (surrogate_row_cov(post, C_inv).cwiseProduct(R_inv).sum() -
                logdet_spd(R_inv, "R_inv") + lambda_r * l1_norm(R_inv)) +
           static_cast<double>(d) *
               (surrogate_col_cov(post, R_inv).cwiseProduct(C_inv).sum() -
                logdet_spd(C_inv, "C_inv") + lambda_c * l1_norm(C_inv));
  };

  bool all_inner_converged = true;
  double prev = 0.0;
  bool have_prev = false;
  for (int sweep = 1; sweep <= cfg.max_sweeps; ++sweep) {
    if (!fixed_R_inv) {
      solve_block(surrogate_row_cov(post, out.C_inv), lambda_r, cfg.glasso,
                  out.R_inv, all_inner_converged);
    }
    if (!fixed_C_inv) {
      solve_block(surrogate_col_cov(post, out.R_inv), lambda_c, cfg.glasso,
                  out.C_inv, all_inner_converged);
    }
    out.sweeps = sweep;

    const double value = block_value(out.R_inv, out.C_inv);
    if (have_prev &&
        std::abs(value - prev) <= cfg.tol * std::max(1.0, std::abs(value))) {
      out.converged = all_inner_converged;
      break;
    }
    prev = value;
    have_prev = true;
  }
  return out;
}

}  // namespace kronmtl
