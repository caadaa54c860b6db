#include "core/types.hpp"

#include "core/linalg.hpp"

namespace kronmtl {

void fail(ErrKind k, const std::string& msg) { throw Error(k, msg); }

void require(bool cond, ErrKind k, const std::string& msg) {
  if (!cond) fail(k, msg);
}

void validate_dataset(const Dataset& data) {
  require(data.X.rows() >= 1 && data.X.cols() >= 1, ErrKind::config,
          "dataset: X must have at least one row and one column");
  require(data.Y.cols() >= 1, ErrKind::config,
          "dataset: Y must have at least one column");
  require(data.X.rows() == data.Y.rows(), ErrKind::config,
          "dataset: X and Y row counts differ");
  require(all_finite(data.X) && all_finite(data.Y), ErrKind::config,
          "dataset: entries must be finite");
  if (data.centered) {
    require(data.column_means.size() == data.Y.cols(), ErrKind::config,
            "dataset: column_means size must match Y columns");
    const double bound = 1e-9 * static_cast<double>(data.Y.rows());
    require((data.Y.colwise().sum().cwiseAbs().maxCoeff()) <= bound,
            ErrKind::config, "dataset: centered flag set but columns of Y do not sum to ~0");
  }
}

Dataset make_dataset(Matrix X, Matrix Y) {
  Dataset d;
  d.X = std::move(X);
  d.Y = std::move(Y);
  d.centered = false;
  d.column_means = Vector::Zero(d.Y.cols());
  validate_dataset(d);
  return d;
}

Dataset center_columns(const Dataset& data) {
  validate_dataset(data);
  Dataset out;
  out.X = data.X;
  out.column_means = data.Y.colwise().mean();
  out.Y = data.Y.rowwise() - out.column_means.transpose();
  out.centered = true;
  if (data.centered) out.column_means += data.column_means;
  validate_dataset(out);
  return out;
}

void validate_hyperparams(const Hyperparams& hp) {
  require(std::isfinite(hp.sigma2) && hp.sigma2 > 0.0, ErrKind::config,
          "hyperparams: sigma2 must be positive and finite");
  require(std::isfinite(hp.gamma) && hp.gamma >= 0.0, ErrKind::config,
          "hyperparams: gamma must be nonnegative");
  require(std::isfinite(hp.lambda_r) && hp.lambda_r >= 0.0, ErrKind::config,
          "hyperparams: lambda_r must be nonnegative");
  require(std::isfinite(hp.lambda_c) && hp.lambda_c >= 0.0, ErrKind::config,
          "hyperparams: lambda_c must be nonnegative");
}

void require_spd_shape(const Matrix& A, int dim, const std::string& name) {
  require(A.rows() == dim && A.cols() == dim, ErrKind::config,
          name + ": wrong dimensions");
  require(all_finite(A), ErrKind::config, name + ": entries must be finite");
  const double scale = A.cwiseAbs().maxCoeff();
  require((A - A.transpose()).cwiseAbs().maxCoeff() <= 1e-8 * (scale + 1.0),
          ErrKind::config, name + ": must be symmetric");
}

}  // namespace kronmtl
