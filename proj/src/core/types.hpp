#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>

namespace kronmtl {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// Failure categories. They map onto process exit codes at the boundary:
// config -> 2, io -> 3, numeric -> 4. invalid_argument covers API misuse
// (null handles and the like) and maps to 1.
enum class ErrKind { invalid_argument, config, io, numeric };

class Error : public std::runtime_error {
public:
  Error(ErrKind k, const std::string& msg) : std::runtime_error(msg), kind(k) {}
  ErrKind kind;
};

[[noreturn]] void fail(ErrKind k, const std::string& msg);
void require(bool cond, ErrKind k, const std::string& msg);

// Observations for one split. X is N x D, Y is N x K. When centered is set,
// column_means holds the K means that were subtracted from Y.
struct Dataset {
  Matrix X;
  Matrix Y;
  bool centered = false;
  Vector column_means;  // size K; zeros unless centered

  int n() const { return static_cast<int>(X.rows()); }
  int d() const { return static_cast<int>(X.cols()); }
  int k() const { return static_cast<int>(Y.cols()); }
};

// Validates shapes, finiteness and (when flagged) the centering property.
Dataset make_dataset(Matrix X, Matrix Y);

// Subtracts per-column means of Y and records them.
Dataset center_columns(const Dataset& data);

void validate_dataset(const Dataset& data);

// Separable prior precisions: R_inv acts on rows (features, D x D),
// C_inv on columns (tasks, K x K). Both symmetric positive definite.
struct PriorPrecisions {
  Matrix R_inv;
  Matrix C_inv;
};

// Factored posterior state: mean M (D x K) and row/column covariance
// factors G (D x D), H (K x K). The degenerate state G = H = 0 encodes the
// point-mass approximation used by the plain "mvg" variant.
struct Posterior {
  Matrix M;
  Matrix G;
  Matrix H;

  bool degenerate() const { return G.isZero(0.0) && H.isZero(0.0); }
};

struct Hyperparams {
  double sigma2 = 1.0;   // observation noise variance
  double gamma = 0.0;    // nuclear norm weight on the mean
  double lambda_r = 0.0; // l1 weight on the row precision
  double lambda_c = 0.0; // l1 weight on the column precision
};

void validate_hyperparams(const Hyperparams& hp);

// Which count divides the residual in the noise update (and multiplies
// ln(sigma2) in the joint objective, so the two stay consistent).
enum class Sigma2Denominator { nd, nk };

void require_spd_shape(const Matrix& A, int dim, const std::string& name);

}  // namespace kronmtl
