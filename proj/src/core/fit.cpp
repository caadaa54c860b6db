#include "core/fit.hpp"

#include <chrono>

#include "core/linalg.hpp"
#include "core/matvar.hpp"

namespace kronmtl {

const char* variant_name(Variant v) {
  switch (v) {
    case Variant::mvg: return "mvg";
    case Variant::mvg_corr: return "mvg-corr";
    case Variant::mvg_rank: return "mvg-rank";
  }
  fail(ErrKind::invalid_argument, "unknown variant");
}

Variant variant_from_name(const std::string& name) {
  if (name == "mvg") return Variant::mvg;
  if (name == "mvg-corr") return Variant::mvg_corr;
  if (name == "mvg-rank") return Variant::mvg_rank;
  fail(ErrKind::config, "unknown variant '" + name +
                            "' (expected mvg, mvg-corr or mvg-rank)");
}

Sigma2Update update_sigma2(const Dataset& data, const Posterior& post,
                           Sigma2Denominator denom) {
  validate_dataset(data);
  const int n = data.n();
  const int d = data.d();
  const int k = data.k();
  require(post.M.rows() == d && post.M.cols() == k, ErrKind::config,
          "update_sigma2: M has wrong dimensions");

  double num = (data.Y - data.X * post.M).squaredNorm();
  if (!post.degenerate()) {
    require_spd_shape(post.G, d, "G");
    require_spd_shape(post.H, k, "H");
    num += (data.X.transpose() * data.X).cwiseProduct(post.G).sum() *
           post.H.trace();
  }
  const double count =
      static_cast<double>(n) * (denom == Sigma2Denominator::nd ? d : k);

  Sigma2Update out;
  if (num <= 0.0) {
    out.sigma2 = 1e-12;
    out.clamped = true;
  } else {
    out.sigma2 = num / count;
  }
  return out;
}

Matrix predict(const Matrix& M, const Matrix& X_new, const Vector& column_means,
               bool centered) {
  require(X_new.cols() == M.rows(), ErrKind::config,
          "predict: X_new column count does not match the model");
  require(all_finite(X_new), ErrKind::config, "predict: X_new must be finite");
  Matrix Y = X_new * M;
  if (centered) {
    require(column_means.size() == M.cols(), ErrKind::config,
            "predict: column mean size does not match the model");
    Y.rowwise() += column_means.transpose();
  }
  return Y;
}

FitWorkspace make_fit_workspace(const Dataset& data, const FitConfig& cfg) {
  validate_dataset(data);
  FitWorkspace ws;
  ws.XtX = data.X.transpose() * data.X;
  symmetrize(ws.XtX);
  ws.XtY = data.X.transpose() * data.Y;
  ws.ynorm2 = data.Y.squaredNorm();
  ws.spec_norm_XtX = spectral_norm_spd(ws.XtX);
  if (cfg.variant != Variant::mvg && cfg.fixed_row_precision) {
    ws.cov.set_design(ws.XtX);
    ws.cov.set_row_precision(*cfg.fixed_row_precision);
    ws.cov_basis_for_fixed_row = true;
  }
  return ws;
}

FitResult fit(const Dataset& data, const Hyperparams& hp0, const FitConfig& cfg,
              const FitWorkspace* shared) {
  const auto t_start = std::chrono::steady_clock::now();
  validate_dataset(data);
  validate_hyperparams(hp0);
  require(cfg.outer_tol > 0.0 && cfg.outer_max_iter >= 1, ErrKind::config,
          "fit: outer tolerance and iteration cap must be positive");

  const int n = data.n();
  const int d = data.d();
  const int k = data.k();
  const bool degenerate = (cfg.variant == Variant::mvg);
  const double gamma = (cfg.variant == Variant::mvg_rank) ? hp0.gamma : 0.0;
  const double lambda_r = hp0.lambda_r;
  const double lambda_c = hp0.lambda_c;
  const double denom_count =
      static_cast<double>(n) *
      (cfg.sigma2_denominator == Sigma2Denominator::nd ? d : k);

  Matrix R_inv, C_inv;
  if (cfg.fixed_row_precision) {
    R_inv = *cfg.fixed_row_precision;
    require_spd_shape(R_inv, d, "fixed row precision");
  } else {
    R_inv = Matrix::Identity(d, d);
  }
  if (cfg.fixed_col_precision) {
    C_inv = *cfg.fixed_col_precision;
    require_spd_shape(C_inv, k, "fixed col precision");
  } else {
    C_inv = Matrix::Identity(k, k);
  }

  double sigma2;
  if (cfg.sigma2_init) {
    sigma2 = *cfg.sigma2_init;
    require(sigma2 > 0.0 && std::isfinite(sigma2), ErrKind::config,
            "fit: sigma2_init must be positive");
  } else {
    sigma2 = entry_variance(data.Y);
    if (sigma2 <= 0.0) sigma2 = 1.0;
  }

  // Local workspace unless the caller shares one built from the same design.
  FitWorkspace local_ws;
  const FitWorkspace* ws = shared;
  if (!ws) {
    local_ws = make_fit_workspace(data, cfg);
    ws = &local_ws;
  }
  require(ws->XtX.rows() == d && ws->XtY.cols() == k, ErrKind::invalid_argument,
          "fit: shared workspace does not match the dataset");

  CovarianceSolver local_cov;
  const CovarianceSolver* cov = nullptr;
  bool row_precision_dirty = false;
  if (!degenerate) {
    if (ws->cov_basis_for_fixed_row && cfg.fixed_row_precision) {
      cov = &ws->cov;
    } else {
      local_cov.set_design(ws->XtX);
      local_cov.set_row_precision(R_inv);
      cov = &local_cov;
    }
  }

  double spec_norm_Rinv = spectral_norm_spd(R_inv);
  double logdet_Rinv = logdet_spd(R_inv, "R_inv");

  MeanProblem prob;
  prob.XtX = ws->XtX;
  prob.XtY = ws->XtY;
  prob.ynorm2 = ws->ynorm2;
  prob.R_inv = R_inv;
  prob.C_inv = C_inv;
  prob.gamma = gamma;

  Matrix M = Matrix::Zero(d, k);
  Matrix H = Matrix::Identity(k, k);
  Matrix G;
  CovarianceSolver::State cov_state;

  FitResult out;
  FitReport& rep = out.report;
  double J_prev = 0.0;
  const bool precisions_fixed =
      cfg.fixed_row_precision.has_value() && cfg.fixed_col_precision.has_value();

  for (int t = 1; t <= cfg.outer_max_iter; ++t) {
    rep.outer_iters = t;

    // Mean block.
    prob.sigma2 = sigma2;
    prob.lipschitz = 2.0 * ws->spec_norm_XtX / sigma2 +
                     2.0 * spec_norm_Rinv * spectral_norm_spd(C_inv);
    MeanSolveResult mres = solve_mean(prob, cfg.mean, &M);
    M = std::move(mres.M);
    rep.mean_iters.push_back(mres.iters);

    // Covariance block.
    if (!degenerate) {
      if (row_precision_dirty) {
        local_cov.set_row_precision(R_inv);
        row_precision_dirty = false;
      }
      cov_state = cov->solve(C_inv, sigma2, cfg.cov, &H);
      H = cov_state.H;
      G = cov->assemble_G(cov_state);
      rep.cov_iters.push_back(cov_state.iters);
    }

    // Precision block.
    if (!precisions_fixed) {
      Posterior post_now{M, degenerate ? Matrix::Zero(d, d) : G,
                         degenerate ? Matrix::Zero(k, k) : H};
      PrecisionUpdateResult pres = update_precisions(
          post_now, R_inv, C_inv, lambda_r, lambda_c,
          cfg.fixed_row_precision ? &*cfg.fixed_row_precision : nullptr, cfg.prec,
          cfg.fixed_col_precision ? &*cfg.fixed_col_precision : nullptr);
      rep.prec_sweeps.push_back(pres.sweeps);
      if (!cfg.fixed_row_precision) {
        const bool changed = !pres.R_inv.isApprox(R_inv, 0.0);
        R_inv = std::move(pres.R_inv);
        if (changed) {
          row_precision_dirty = !degenerate;
          spec_norm_Rinv = spectral_norm_spd(R_inv);
          logdet_Rinv = logdet_spd(R_inv, "R_inv");
          prob.R_inv = R_inv;
        }
      }
      if (!cfg.fixed_col_precision) {
        C_inv = std::move(pres.C_inv);
        prob.C_inv = C_inv;
      }
    }

    // Noise block. The covariance traces are current: M moved before the
    // covariance solve, and G, H have not changed since.
    const double resid2 = (data.Y - data.X * M).squaredNorm();
    const double tr_XtXG_trH =
        degenerate ? 0.0 : cov_state.tr_XtXG * cov_state.tr_H;
    if (!cfg.fix_sigma2) {
      const double num = resid2 + tr_XtXG_trH;
      if (num <= 0.0) {
        sigma2 = 1e-12;
        rep.sigma2_clamped = true;
      } else {
        sigma2 = num / denom_count;
      }
    }

    // Joint objective with the freshly updated blocks.
    double J = denom_count * std::log(sigma2) + (resid2 + tr_XtXG_trH) / sigma2;
    J += C_inv.cwiseProduct(M.transpose() * R_inv * M).sum();
    J -= k * logdet_Rinv + d * logdet_spd(C_inv, "C_inv");
    if (gamma > 0.0) J += gamma * nuclear_norm(M);
    J += k * lambda_r * l1_norm(R_inv) + d * lambda_c * l1_norm(C_inv);
    if (!degenerate) {
      J += R_inv.cwiseProduct(G).sum() * C_inv.cwiseProduct(H).sum();
      J -= k * cov_state.logdet_G + d * cov_state.logdet_H;
    }
    require(std::isfinite(J), ErrKind::numeric, "fit: non-finite objective");
    rep.objective_trace.push_back(J);

    if (t >= 2 &&
        std::abs(J_prev - J) <= cfg.outer_tol * std::max(1.0, std::abs(J_prev))) {
      rep.converged = true;
      break;
    }
    J_prev = J;
  }

  out.post.M = std::move(M);
  if (degenerate) {
    out.post.G = Matrix::Zero(d, d);
    out.post.H = Matrix::Zero(k, k);
  } else {
    out.post.G = std::move(G);
    out.post.H = std::move(H);
  }
  out.prior.R_inv = std::move(R_inv);
  out.prior.C_inv = std::move(C_inv);
  out.hp.sigma2 = sigma2;
  out.hp.gamma = gamma;
  out.hp.lambda_r = lambda_r;
  out.hp.lambda_c = lambda_c;
  rep.elapsed_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start)
          .count();
  return out;
}

}  // namespace kronmtl
