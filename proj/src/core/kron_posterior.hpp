#pragma once

#include "core/types.hpp"

namespace kronmtl {

struct CovConfig {
  double tol = 1e-8;   // relative stationarity residual of the (G, H) system
  int max_iter = 500;  // alternation sweeps
};

struct CovResult {
  Matrix G;
  Matrix H;
  int iters = 0;
  bool converged = false;
};

// Stationarity conditions for the covariance factors:
//   G_inv = (1/K) ( (tr(H)/sigma2) X^T X + tr(C_inv H) R_inv )
//   H_inv = (1/D) ( (tr(X^T X G)/sigma2) I_K + tr(R_inv G) C_inv )
// Each returns the inverse of the assembled precision, symmetrized.
Matrix update_G(const Matrix& H, const Dataset& data, const PriorPrecisions& prior,
                double sigma2);
Matrix update_H(const Matrix& G, const Dataset& data, const PriorPrecisions& prior,
                double sigma2);

// Alternates the two updates from H = I_K, rescaling (G, H) -> (aG, H/a)
// with a = tr(H)/K after every H update so tr(H) = K on return. After a
// sweep the H equation holds exactly, and the G equation misses only by the
// sweep's change in tr(H) and tr(C_inv H), so the stopping rule measures the
// true stationarity residual directly. The normalized fixed point is unique,
// so the result does not depend on the start.
CovResult fit_covariance(const Dataset& data, const PriorPrecisions& prior,
                         double sigma2, const CovConfig& cfg = {});

// Same fixed point computed in a diagonalizing basis. One generalized
// eigendecomposition of (X^T X, R_inv) turns every sweep into O(D + K)
// scalar work, and the basis is reusable across solves while X and R_inv
// are unchanged (the usual situation: the row precision is fixed and only
// sigma2 and C_inv move between outer iterations).
class CovarianceSolver {
public:
  struct State {
    Vector g_eig;  // eigenvalues of G in the cached basis (G = Phi diag Phi^T)
    Matrix H;
    double tr_XtXG = 0.0;
    double tr_RinvG = 0.0;
    double tr_H = 0.0;
    double tr_CinvH = 0.0;
    double logdet_G = 0.0;
    double logdet_H = 0.0;
    int iters = 0;
    bool converged = false;
  };

  void set_design(Matrix XtX);
  void set_row_precision(const Matrix& R_inv);
  bool ready() const { return have_basis_; }

  // H_warm, when given, seeds the alternation in place of I_K; the first
  // G update is then an exact coordinate step from that H, which keeps the
  // block value non-increasing relative to the warm state.
  State solve(const Matrix& C_inv, double sigma2, const CovConfig& cfg,
              const Matrix* H_warm = nullptr) const;

  Matrix assemble_G(const State& s) const;

private:
  Matrix XtX_;
  Matrix Phi_;          // Phi^T R_inv Phi = I, Phi^T XtX Phi = diag(pencil_)
  Vector pencil_;
  double logdet_Rinv_ = 0.0;
  // Frobenius inner products of XtX and R_inv, for the residual norm of the
  // G equation without leaving the eigenbasis.
  double sxx_ = 0.0;
  double sxr_ = 0.0;
  double srr_ = 0.0;
  bool have_design_ = false;
  bool have_basis_ = false;
};

}  // namespace kronmtl
