#include "core/nuclear_mean.hpp"

#include "core/linalg.hpp"

namespace kronmtl {

Matrix svt_prox(const Matrix& A, double tau) {
  require(tau >= 0.0 && std::isfinite(tau), ErrKind::config,
          "svt_prox: tau must be nonnegative");
  Eigen::BDCSVD<Matrix> svd(A, Eigen::ComputeThinU | Eigen::ComputeThinV);
  Vector s = svd.singularValues();
  for (Eigen::Index i = 0; i < s.size(); ++i) s(i) = std::max(0.0, s(i) - tau);
  return svd.matrixU() * s.asDiagonal() * svd.matrixV().transpose();
}

Matrix smooth_gradient(const Matrix& M, const Dataset& data,
                       const PriorPrecisions& prior, double sigma2) {
  validate_dataset(data);
  require(sigma2 > 0.0, ErrKind::config, "smooth_gradient: sigma2 must be positive");
  return (2.0 / sigma2) * (data.X.transpose() * (data.X * M - data.Y)) +
         2.0 * prior.R_inv * M * prior.C_inv;
}

namespace {

bool has_prior(const MeanProblem& p) {
  return !(p.R_inv.isZero(0.0) || p.C_inv.isZero(0.0));
}

// Smooth part via cached Gram pieces:
//   (1/sigma2)(<M, XtX M> - 2 <M, XtY> + |Y|^2) + <M, R_inv M C_inv>.
double smooth_value(const MeanProblem& p, const Matrix& M) {
  double v = (M.cwiseProduct(p.XtX * M).sum() - 2.0 * M.cwiseProduct(p.XtY).sum() +
              p.ynorm2) /
             p.sigma2;
  if (has_prior(p)) v += M.cwiseProduct(p.R_inv * M * p.C_inv).sum();
  return v;
}

double composite_value(const MeanProblem& p, const Matrix& M) {
  double v = smooth_value(p, M);
  if (p.gamma > 0.0) v += p.gamma * nuclear_norm(M);
  return v;
}

Matrix gradient(const MeanProblem& p, const Matrix& M) {
  Matrix g = (2.0 / p.sigma2) * (p.XtX * M - p.XtY);
  if (has_prior(p)) g += 2.0 * p.R_inv * M * p.C_inv;
  return g;
}

struct StepResult {
  Matrix M;
  double nuc = 0.0;  // |M|_* when gamma > 0 (from the thresholded spectrum)
};

StepResult prox_step(const MeanProblem& p, const Matrix& point, const Matrix& grad,
                     double step) {
  StepResult r;
  r.M = point - step * grad;
  if (p.gamma > 0.0) {
    Eigen::BDCSVD<Matrix> svd(r.M, Eigen::ComputeThinU | Eigen::ComputeThinV);
    Vector s = svd.singularValues();
    const double tau = p.gamma * step;
    for (Eigen::Index i = 0; i < s.size(); ++i) s(i) = std::max(0.0, s(i) - tau);
    r.M = svd.matrixU() * s.asDiagonal() * svd.matrixV().transpose();
    r.nuc = s.sum();
  }
  return r;
}

double step_value(const MeanProblem& p, const StepResult& r) {
  return smooth_value(p, r.M) + p.gamma * r.nuc;
}

// Exact minimizer of the unpenalized problem. The stationarity condition
//   (XtX/sigma2) M + R_inv M C_inv = XtY/sigma2
// decouples over the eigenvectors of C_inv: with C_inv = Q diag(w) Q^T and
// Mt = M Q, column j solves (XtX/sigma2 + w_j R_inv) mt_j = ((XtY/sigma2) Q)_j.
// Returns false when a column system is not positive definite (the minimizer
// is then not unique) or the solve looks numerically unreliable; the caller
// falls back to the iterative path.
bool solve_unpenalized(const MeanProblem& p, Matrix* out) {
  const Eigen::Index d = p.XtX.rows();
  const Eigen::Index k = p.XtY.cols();
  const Matrix B = p.XtY / p.sigma2;
  if (!has_prior(p)) {
    Eigen::LLT<Matrix> llt(Matrix(p.XtX / p.sigma2));
    if (llt.info() != Eigen::Success) return false;
    *out = llt.solve(B);
  } else {
    Eigen::SelfAdjointEigenSolver<Matrix> es(p.C_inv);
    if (es.info() != Eigen::Success) return false;
    const Matrix& Q = es.eigenvectors();
    const Matrix Bt = B * Q;
    Matrix Mt(d, k);
    for (Eigen::Index j = 0; j < k; ++j) {
      Eigen::LLT<Matrix> llt(
          Matrix(p.XtX / p.sigma2 + es.eigenvalues()(j) * p.R_inv));
      if (llt.info() != Eigen::Success) return false;
      Mt.col(j) = llt.solve(Bt.col(j));
    }
    *out = Mt * Q.transpose();
  }
  if (!all_finite(*out)) return false;
  Matrix resid = p.XtX * (*out) / p.sigma2 - B;
  if (has_prior(p)) resid += p.R_inv * (*out) * p.C_inv;
  return resid.norm() <= 1e-8 * std::max(1.0, B.norm());
}

}  // namespace

MeanProblem make_mean_problem(const Dataset& data, const PriorPrecisions& prior,
                              double sigma2, double gamma) {
  validate_dataset(data);
  require(sigma2 > 0.0 && std::isfinite(sigma2), ErrKind::config,
          "solve_mean: sigma2 must be positive");
  require(gamma >= 0.0 && std::isfinite(gamma), ErrKind::config,
          "solve_mean: gamma must be nonnegative");
  const int d = data.d();
  const int k = data.k();
  require(prior.R_inv.rows() == d && prior.R_inv.cols() == d, ErrKind::config,
          "solve_mean: R_inv has wrong dimensions");
  require(prior.C_inv.rows() == k && prior.C_inv.cols() == k, ErrKind::config,
          "solve_mean: C_inv has wrong dimensions");
  require(all_finite(prior.R_inv) && all_finite(prior.C_inv), ErrKind::config,
          "solve_mean: precisions must be finite");

  MeanProblem p;
  p.XtX = data.X.transpose() * data.X;
  p.XtY = data.X.transpose() * data.Y;
  p.ynorm2 = data.Y.squaredNorm();
  p.R_inv = prior.R_inv;
  p.C_inv = prior.C_inv;
  p.sigma2 = sigma2;
  p.gamma = gamma;
  p.lipschitz = 2.0 * spectral_norm_spd(p.XtX) / sigma2;
  if (has_prior(p))
    p.lipschitz += 2.0 * spectral_norm_spd(p.R_inv) * spectral_norm_spd(p.C_inv);
  require(p.lipschitz > 0.0 && std::isfinite(p.lipschitz), ErrKind::numeric,
          "solve_mean: degenerate smoothness bound");
  return p;
}

MeanSolveResult solve_mean(const MeanProblem& p, const MeanSolveConfig& cfg,
                           const Matrix* warm_start) {
  const Eigen::Index d = p.XtX.rows();
  const Eigen::Index k = p.XtY.cols();
  Matrix x = warm_start ? *warm_start : Matrix::Zero(d, k);
  require(x.rows() == d && x.cols() == k, ErrKind::config,
          "solve_mean: warm start has wrong dimensions");

  MeanSolveResult out;
  if (p.gamma == 0.0) {
    Matrix direct;
    if (solve_unpenalized(p, &direct)) {
      const double fdirect = smooth_value(p, direct);
      if (!warm_start || fdirect <= composite_value(p, x)) {
        out.M = std::move(direct);
        out.objective = fdirect;
        out.iters = 0;
        out.converged = true;
        return out;
      }
    }
  }

  double step = 1.0 / p.lipschitz;
  Matrix y = x;
  double t = 1.0;
  double fx = composite_value(p, x);

  for (int it = 1; it <= cfg.max_iter; ++it) {
    StepResult cand = prox_step(p, y, gradient(p, y), step);
    double fcand = step_value(p, cand);

    if (fcand > fx) {
      // Momentum overshot: restart from the current iterate.
      y = x;
      t = 1.0;
      cand = prox_step(p, y, gradient(p, y), step);
      fcand = step_value(p, cand);
      if (fcand > fx && cfg.backtracking) {
        int halvings = 0;
        double s = step;
        while (fcand > fx && halvings < cfg.bt_max_halvings) {
          s *= cfg.bt_shrink;
          cand = prox_step(p, x, gradient(p, x), s);
          fcand = step_value(p, cand);
          ++halvings;
        }
        require(fcand <= fx, ErrKind::numeric,
                "solve_mean: step size underflow without progress");
      }
      if (fcand > fx) {
        // No descent direction at this resolution; treat as converged.
        out.iters = it;
        out.converged = true;
        break;
      }
    }

    const Matrix dx = cand.M - x;
    const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
    y = cand.M + ((t - 1.0) / t_next) * dx;
    t = t_next;
    x = std::move(cand.M);

    const double drop = fx - fcand;
    fx = fcand;
    out.iters = it;
    if (drop <= cfg.tol * std::max(1.0, std::abs(fx))) {
      out.converged = true;
      break;
    }
  }

  out.M = std::move(x);
  out.objective = fx;
  require(all_finite(out.M), ErrKind::numeric, "solve_mean: non-finite iterate");
  return out;
}

double mean_objective(const Matrix& M, const Dataset& data,
                      const PriorPrecisions& prior, double sigma2, double gamma) {
  double v = (data.Y - data.X * M).squaredNorm() / sigma2;
  if (!(prior.R_inv.isZero(0.0) || prior.C_inv.isZero(0.0)))
    v += M.cwiseProduct(prior.R_inv * M * prior.C_inv).sum();
  if (gamma > 0.0) v += gamma * nuclear_norm(M);
  return v;
}

MeanSolveResult solve_mean(const Dataset& data, const PriorPrecisions& prior,
                           double sigma2, double gamma,
                           const MeanSolveConfig& cfg, const Matrix* warm_start) {
  return solve_mean(make_mean_problem(data, prior, sigma2, gamma), cfg, warm_start);
}

}  // namespace kronmtl
