#include "core/evalkit.hpp"

#include <cmath>

#include "core/linalg.hpp"

namespace kronmtl {

std::optional<double> r_squared(const Matrix& Y_true, const Matrix& Y_pred,
                                const Vector& train_col_means) {
  require(Y_true.rows() == Y_pred.rows() && Y_true.cols() == Y_pred.cols(),
          ErrKind::invalid_argument, "r_squared: shape mismatch");
  require(train_col_means.size() == Y_true.cols(), ErrKind::invalid_argument,
          "r_squared: means length must equal the column count");
  const double sse = (Y_true - Y_pred).squaredNorm();
  const double sst =
      (Y_true.rowwise() - train_col_means.transpose()).squaredNorm();
  if (sst == 0.0) return std::nullopt;
  return 1.0 - sse / sst;
}

AucResult structure_auc(const Matrix& true_prec, const Matrix& est_prec,
                        double threshold) {
  require(true_prec.rows() == est_prec.rows(), ErrKind::invalid_argument,
          "structure_auc: dimension mismatch");
  const int k = static_cast<int>(true_prec.rows());
  require_spd_shape(true_prec, k, "structure_auc: true precision");
  require_spd_shape(est_prec, k, "structure_auc: estimated precision");
  require(k >= 2, ErrKind::invalid_argument,
          "structure_auc: need at least two tasks");

  std::vector<double> scores;
  std::vector<bool> labels;
  scores.reserve(k * (k - 1) / 2);
  for (int j = 1; j < k; ++j)
    for (int i = 0; i < j; ++i) {
      labels.push_back(std::abs(true_prec(i, j)) > threshold);
      scores.push_back(std::abs(est_prec(i, j)));
    }

  const int total = static_cast<int>(scores.size());
  int n_pos = 0;
  for (bool b : labels) n_pos += b ? 1 : 0;
  const int n_neg = total - n_pos;
  if (n_pos == 0 || n_neg == 0) return {0.5, true};

  std::vector<int> order(total);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](int a, int b) { return scores[a] < scores[b]; });

  // 1-based mid-ranks over tied score runs.
  std::vector<double> rank(total, 0.0);
  int i = 0;
  while (i < total) {
    int j = i;
    while (j + 1 < total && scores[order[j + 1]] == scores[order[i]]) ++j;
    const double mid = 0.5 * ((i + 1) + (j + 1));
    for (int t = i; t <= j; ++t) rank[order[t]] = mid;
    i = j + 1;
  }

  double rank_sum_pos = 0.0;
  for (int t = 0; t < total; ++t)
    if (labels[t]) rank_sum_pos += rank[t];
  const double u = rank_sum_pos - 0.5 * n_pos * (n_pos + 1.0);
  return {u / (static_cast<double>(n_pos) * n_neg), false};
}

namespace {

// Lowest-index argmax; flags whether another column tied it.
std::pair<int, bool> row_argmax(const Matrix& Y, Eigen::Index row) {
  int best = 0;
  bool tied = false;
  for (Eigen::Index j = 1; j < Y.cols(); ++j) {
    if (Y(row, j) > Y(row, best)) {
      best = static_cast<int>(j);
      tied = false;
    } else if (Y(row, j) == Y(row, best)) {
      tied = true;
    }
  }
  return {best, tied};
}

}  // namespace

AccuracyResult accuracy_1ofk(const Matrix& Y_true_onehot, const Matrix& Y_scores) {
  require(Y_true_onehot.rows() == Y_scores.rows() &&
              Y_true_onehot.cols() == Y_scores.cols(),
          ErrKind::invalid_argument, "accuracy_1ofk: shape mismatch");
  require(Y_true_onehot.rows() >= 1 && Y_true_onehot.cols() >= 1,
          ErrKind::invalid_argument, "accuracy_1ofk: empty input");

  AccuracyResult out;
  int hits = 0;
  for (Eigen::Index r = 0; r < Y_true_onehot.rows(); ++r) {
    int one_at = -1;
    for (Eigen::Index j = 0; j < Y_true_onehot.cols(); ++j) {
      const double v = Y_true_onehot(r, j);
      if (v == 1.0) {
        require(one_at < 0, ErrKind::config,
                "accuracy_1ofk: row " + std::to_string(r) + " has multiple ones");
        one_at = static_cast<int>(j);
      } else {
        require(v == 0.0, ErrKind::config,
                "accuracy_1ofk: row " + std::to_string(r) + " is not one-hot");
      }
    }
    require(one_at >= 0, ErrKind::config,
            "accuracy_1ofk: row " + std::to_string(r) + " has no one");
    const auto [pred, tied] = row_argmax(Y_scores, r);
    out.ties = out.ties || tied;
    hits += (pred == one_at) ? 1 : 0;
  }
  out.value = static_cast<double>(hits) / static_cast<double>(Y_true_onehot.rows());
  return out;
}

Matrix ridge_fit(const Dataset& data, double lambda) {
  require(lambda >= 0.0 && std::isfinite(lambda), ErrKind::invalid_argument,
          "ridge_fit: lambda must be nonnegative");
  const auto& X = data.X;
  const auto& Y = data.Y;
  if (X.cols() <= X.rows()) {
    Matrix A = X.transpose() * X;
    A.diagonal().array() += lambda;
    Eigen::LLT<Matrix> llt(A);
    require(llt.info() == Eigen::Success, ErrKind::numeric,
            "ridge_fit: normal equations not positive definite");
    return llt.solve(X.transpose() * Y);
  }
  Matrix B = X * X.transpose();
  B.diagonal().array() += lambda;
  Eigen::LLT<Matrix> llt(B);
  require(llt.info() == Eigen::Success, ErrKind::numeric,
          "ridge_fit: normal equations not positive definite");
  return X.transpose() * llt.solve(Y);
}

MeanSolveResult nucnorm_fit(const Dataset& data, double lambda,
                            const MeanSolveConfig& cfg) {
  require(lambda >= 0.0 && std::isfinite(lambda), ErrKind::invalid_argument,
          "nucnorm_fit: lambda must be nonnegative");
  PriorPrecisions none;
  none.R_inv = Matrix::Zero(data.d(), data.d());
  none.C_inv = Matrix::Zero(data.k(), data.k());
  return solve_mean(data, none, 1.0, lambda, cfg);
}

Matrix sample_covariance(const Matrix& Y) {
  require(Y.rows() >= 1, ErrKind::invalid_argument,
          "sample_covariance: need at least one row");
  const Matrix Z = Y.rowwise() - Y.colwise().mean();
  Matrix S = (Z.transpose() * Z) / static_cast<double>(Y.rows());
  symmetrize(S);
  return S;
}

GlassoResult glasso_baseline(const Matrix& Y_train, double lambda,
                             const GlassoConfig& cfg) {
  return glasso(sample_covariance(Y_train), lambda, cfg);
}

}  // namespace kronmtl
