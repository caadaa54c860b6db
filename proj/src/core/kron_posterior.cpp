#include "core/kron_posterior.hpp"

#include "core/linalg.hpp"

namespace kronmtl {

namespace {

void check_inputs(const Dataset& data, const PriorPrecisions& prior, double sigma2) {
  validate_dataset(data);
  require_spd_shape(prior.R_inv, data.d(), "R_inv");
  require_spd_shape(prior.C_inv, data.k(), "C_inv");
  require(sigma2 > 0.0 && std::isfinite(sigma2), ErrKind::config,
          "covariance update: sigma2 must be positive");
}

// |alpha XtX + beta R_inv|_F from precomputed Frobenius inner products.
double mix_norm(double alpha, double beta, double sxx, double sxr, double srr) {
  return std::sqrt(std::max(
      0.0, alpha * alpha * sxx + 2.0 * alpha * beta * sxr + beta * beta * srr));
}

}  // namespace

Matrix update_G(const Matrix& H, const Dataset& data, const PriorPrecisions& prior,
                double sigma2) {
  check_inputs(data, prior, sigma2);
  require_spd_shape(H, data.k(), "H");
  const double k = static_cast<double>(data.k());
  const Matrix XtX = data.X.transpose() * data.X;
  const Matrix G_inv =
      ((H.trace() / sigma2) * XtX + prior.C_inv.cwiseProduct(H).sum() * prior.R_inv) /
      k;
  return spd_inverse(G_inv, "G_inv");
}

Matrix update_H(const Matrix& G, const Dataset& data, const PriorPrecisions& prior,
                double sigma2) {
  check_inputs(data, prior, sigma2);
  require_spd_shape(G, data.d(), "G");
  const double d = static_cast<double>(data.d());
  const Matrix XtX = data.X.transpose() * data.X;
  const Matrix H_inv =
      ((XtX.cwiseProduct(G).sum() / sigma2) * Matrix::Identity(data.k(), data.k()) +
       prior.R_inv.cwiseProduct(G).sum() * prior.C_inv) /
      d;
  return spd_inverse(H_inv, "H_inv");
}

CovResult fit_covariance(const Dataset& data, const PriorPrecisions& prior,
                         double sigma2, const CovConfig& cfg) {
  check_inputs(data, prior, sigma2);
  const double k = static_cast<double>(data.k());
  const Matrix XtX = data.X.transpose() * data.X;
  const double sxx = XtX.squaredNorm();
  const double sxr = XtX.cwiseProduct(prior.R_inv).sum();
  const double srr = prior.R_inv.squaredNorm();

  CovResult out;
  out.H = Matrix::Identity(data.k(), data.k());
  for (int it = 1; it <= cfg.max_iter; ++it) {
    // The G update is exact for the incoming H, and the H update is exact
    // for the new G (the rescale preserves both equations), so the G
    // equation misses at the end of the sweep only by the change of tr(H)
    // and tr(C_inv H) across the sweep.
    const double tr_h0 = out.H.trace();
    const double tr_ch0 = prior.C_inv.cwiseProduct(out.H).sum();
    out.G = update_G(out.H, data, prior, sigma2);
    out.H = update_H(out.G, data, prior, sigma2);
    const double tr_h1 = out.H.trace();
    const double tr_ch1 = prior.C_inv.cwiseProduct(out.H).sum();
    const double a = tr_h1 / k;
    out.G *= a;
    out.H /= a;
    out.iters = it;

    const double resid =
        mix_norm((tr_h0 - tr_h1) / sigma2, tr_ch0 - tr_ch1, sxx, sxr, srr);
    const double scale = mix_norm(tr_h0 / sigma2, tr_ch0, sxx, sxr, srr);
    if (resid <= cfg.tol * scale) {
      out.converged = true;
      break;
    }
  }
  return out;
}

void CovarianceSolver::set_design(Matrix XtX) {
  require(XtX.rows() == XtX.cols() && XtX.rows() >= 1, ErrKind::config,
          "covariance solver: design Gram must be square");
  XtX_ = std::move(XtX);
  symmetrize(XtX_);
  have_design_ = true;
  have_basis_ = false;
}

void CovarianceSolver::set_row_precision(const Matrix& R_inv) {
  require(have_design_, ErrKind::invalid_argument,
          "covariance solver: design not set");
  require_spd_shape(R_inv, static_cast<int>(XtX_.rows()), "R_inv");
  Eigen::GeneralizedSelfAdjointEigenSolver<Matrix> ges(XtX_, R_inv);
  require(ges.info() == Eigen::Success, ErrKind::numeric,
          "covariance solver: generalized eigendecomposition failed");
  Phi_ = ges.eigenvectors();  // Phi^T R_inv Phi = I
  pencil_ = ges.eigenvalues().cwiseMax(0.0);
  logdet_Rinv_ = logdet_spd(R_inv, "R_inv");
  sxx_ = XtX_.squaredNorm();
  sxr_ = XtX_.cwiseProduct(R_inv).sum();
  srr_ = R_inv.squaredNorm();
  have_basis_ = true;
}

CovarianceSolver::State CovarianceSolver::solve(const Matrix& C_inv, double sigma2,
                                                const CovConfig& cfg,
                                                const Matrix* H_warm) const {
  require(have_basis_, ErrKind::invalid_argument,
          "covariance solver: row precision not set");
  require(sigma2 > 0.0 && std::isfinite(sigma2), ErrKind::config,
          "covariance solver: sigma2 must be positive");
  const int d = static_cast<int>(XtX_.rows());
  const int k = static_cast<int>(C_inv.rows());
  require_spd_shape(C_inv, k, "C_inv");

  Eigen::SelfAdjointEigenSolver<Matrix> ces(C_inv);
  require(ces.info() == Eigen::Success, ErrKind::numeric,
          "covariance solver: C_inv eigendecomposition failed");
  const Vector omega = ces.eigenvalues();
  require(omega.minCoeff() > 0.0, ErrKind::numeric,
          "covariance solver: C_inv not positive definite");
  const Matrix& Q = ces.eigenvectors();

  State st;
  double tr_H, tr_CinvH;
  if (H_warm) {
    require_spd_shape(*H_warm, k, "H warm start");
    tr_H = H_warm->trace();
    tr_CinvH = C_inv.cwiseProduct(*H_warm).sum();
  } else {
    tr_H = static_cast<double>(k);
    tr_CinvH = C_inv.trace();
  }

  Vector h(k);
  for (int it = 1; it <= cfg.max_iter; ++it) {
    const double a = tr_H / sigma2;
    const double b = tr_CinvH;
    st.g_eig = (a * pencil_.array() + b).inverse().matrix() * static_cast<double>(k);
    st.tr_XtXG = pencil_.dot(st.g_eig);
    st.tr_RinvG = st.g_eig.sum();
    st.logdet_G = st.g_eig.array().log().sum() - logdet_Rinv_;

    const double c = st.tr_XtXG / sigma2;
    const double e = st.tr_RinvG;
    h = (c + e * omega.array()).inverse().matrix() * static_cast<double>(d);
    const double hsum = h.sum();
    const double hc = omega.dot(h);

    // Rescale so tr(H) = K; the product G kron H is unchanged.
    const double alpha = hsum / static_cast<double>(k);
    st.g_eig *= alpha;
    st.tr_XtXG *= alpha;
    st.tr_RinvG *= alpha;
    st.logdet_G += d * std::log(alpha);
    h /= alpha;

    tr_H = h.sum();
    tr_CinvH = omega.dot(h);
    st.tr_H = tr_H;
    st.tr_CinvH = tr_CinvH;
    st.logdet_H = h.array().log().sum();
    st.iters = it;

    // Same residual as the dense alternation: only the sweep's change in
    // tr(H) and tr(C_inv H) keeps the G equation from holding exactly.
    const double resid = mix_norm(a - hsum / sigma2, b - hc, sxx_, sxr_, srr_);
    if (resid <= cfg.tol * mix_norm(a, b, sxx_, sxr_, srr_)) {
      st.converged = true;
      break;
    }
  }

  st.H = Q * h.asDiagonal() * Q.transpose();
  symmetrize(st.H);
  return st;
}

Matrix CovarianceSolver::assemble_G(const State& s) const {
  require(have_basis_, ErrKind::invalid_argument,
          "covariance solver: row precision not set");
  Matrix G = Phi_ * s.g_eig.asDiagonal() * Phi_.transpose();
  symmetrize(G);
  return G;
}

}  // namespace kronmtl
