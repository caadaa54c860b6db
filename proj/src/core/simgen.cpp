#include "core/simgen.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <filesystem>
#include <json.hpp>
#include <vector>

#include "core/csv.hpp"
#include "core/linalg.hpp"

namespace kronmtl {

void validate_spec(const SimSpec& spec) {
  require(spec.n >= 1, ErrKind::invalid_argument, "sim: N must be at least 1");
  require(spec.d >= 2, ErrKind::invalid_argument, "sim: D must be at least 2");
  require(spec.k >= 2, ErrKind::invalid_argument, "sim: K must be at least 2");
  require(spec.rank >= 1 && spec.rank <= std::min(spec.d, spec.k),
          ErrKind::invalid_argument, "sim: rank must lie in [1, min(D, K)]");
  require(spec.snr > 0.0 && std::isfinite(spec.snr), ErrKind::invalid_argument,
          "sim: snr must be positive");
  require(spec.offdiag_density > 0.0 && spec.offdiag_density <= 1.0,
          ErrKind::invalid_argument, "sim: offdiag_density must be in (0, 1]");
  require(spec.laplacian_ridge >= 0.0, ErrKind::invalid_argument,
          "sim: laplacian_ridge must be nonnegative");
}

Matrix pd_gram(const Matrix& U) {
  Matrix P = U * U.transpose();
  symmetrize(P);
  Eigen::SelfAdjointEigenSolver<Matrix> es(P, Eigen::EigenvaluesOnly);
  require(es.info() == Eigen::Success, ErrKind::numeric,
          "pd_gram: eigenvalue computation failed");
  const double shift = std::max(0.0, 1e-3 - es.eigenvalues().minCoeff()) + 1e-3;
  P.diagonal().array() += shift;
  return P;
}

namespace {

double offdiag_nonzero_fraction(const Matrix& P) {
  const Eigen::Index k = P.rows();
  int nz = 0;
  for (Eigen::Index j = 1; j < k; ++j)
    for (Eigen::Index i = 0; i < j; ++i)
      if (P(i, j) != 0.0) ++nz;
  return static_cast<double>(nz) / (static_cast<double>(k) * (k - 1) / 2.0);
}

}  // namespace

SparsePrecision gen_sparse_precision(int k, double offdiag_density, Rng& rng) {
  require(k >= 2, ErrKind::invalid_argument,
          "gen_sparse_precision: K must be at least 2");
  require(offdiag_density > 0.0 && offdiag_density <= 1.0,
          ErrKind::invalid_argument,
          "gen_sparse_precision: density must be in (0, 1]");

  // One uniform field and one sign field shared by every candidate entry
  // probability: U(p) keeps entry (i, j) iff field(i, j) < p. Column-major
  // fill order, uniforms before signs.
  Matrix field(k, k), sign(k, k);
  for (Eigen::Index j = 0; j < k; ++j)
    for (Eigen::Index i = 0; i < k; ++i) field(i, j) = rng.uniform();
  for (Eigen::Index j = 0; j < k; ++j)
    for (Eigen::Index i = 0; i < k; ++i) sign(i, j) = rng.bernoulli(0.5) ? 1.0 : -1.0;

  const auto factor_at = [&](double p) {
    return Matrix((field.array() < p).select(sign, Matrix::Zero(k, k)));
  };
  const auto density_at = [&](double p) {
    const Matrix U = factor_at(p);
    return offdiag_nonzero_fraction(Matrix(U * U.transpose()));
  };

  const double tol = 0.05;
  double lo = 0.0, hi = 1.0;
  double best_p = 1.0;
  double best_gap = std::abs(density_at(1.0) - offdiag_density);
  bool reached = best_gap <= tol;
  for (int step = 0; step < 50 && !reached; ++step) {
    const double mid = 0.5 * (lo + hi);
    const double dens = density_at(mid);
    const double gap = std::abs(dens - offdiag_density);
    if (gap < best_gap) {
      best_gap = gap;
      best_p = mid;
    }
    if (gap <= tol) {
      reached = true;
      break;
    }
    if (dens < offdiag_density)
      lo = mid;
    else
      hi = mid;
  }

  SparsePrecision out;
  const Matrix U = factor_at(best_p);
  out.value = pd_gram(U);
  out.realized_density = offdiag_nonzero_fraction(Matrix(U * U.transpose()));
  out.density_reached = reached;
  return out;
}

SparsePrecision gen_sparse_precision(int k, double offdiag_density,
                                     std::uint64_t seed) {
  Rng rng(seed);
  return gen_sparse_precision(k, offdiag_density, rng);
}

Matrix chain_laplacian(int d, double ridge) {
  require(d >= 2, ErrKind::invalid_argument, "chain_laplacian: D must be at least 2");
  require(ridge >= 0.0, ErrKind::invalid_argument,
          "chain_laplacian: ridge must be nonnegative");
  Vector deg = Vector::Constant(d, 2.0);
  deg(0) = deg(d - 1) = 1.0;
  Matrix L = Matrix::Identity(d, d);
  for (int i = 0; i + 1 < d; ++i) {
    const double w = -1.0 / std::sqrt(deg(i) * deg(i + 1));
    L(i, i + 1) = w;
    L(i + 1, i) = w;
  }
  L.diagonal().array() += ridge;
  return L;
}

namespace {

// Columns ~ N(0, prec^{-1}): with prec = L L^T, solving L^T a = z gives
// Cov(a) = (L L^T)^{-1}.
Matrix sample_gaussian_columns(const Matrix& prec, int cols, Rng& rng) {
  Eigen::LLT<Matrix> llt(prec);
  require(llt.info() == Eigen::Success, ErrKind::numeric,
          "gen_lowrank_W: precision matrix is not positive definite");
  const Matrix z = rng.normal_matrix(prec.rows(), cols);
  return llt.matrixU().solve(z);
}

}  // namespace

Matrix gen_lowrank_W(const Matrix& R_inv, const Matrix& C_inv, int rank, Rng& rng) {
  require(R_inv.rows() == R_inv.cols() && C_inv.rows() == C_inv.cols(),
          ErrKind::invalid_argument, "gen_lowrank_W: precisions must be square");
  require(rank >= 1 && rank <= std::min(R_inv.rows(), C_inv.rows()),
          ErrKind::invalid_argument, "gen_lowrank_W: rank must lie in [1, min(D, K)]");
  const Matrix A = sample_gaussian_columns(R_inv, rank, rng);
  const Matrix B = sample_gaussian_columns(C_inv, rank, rng);
  return A * B.transpose();
}

Matrix gen_lowrank_W(const Matrix& R_inv, const Matrix& C_inv, int rank,
                     std::uint64_t seed) {
  Rng rng(seed);
  return gen_lowrank_W(R_inv, C_inv, rank, rng);
}

SimData gen_dataset(const SimSpec& spec) {
  validate_spec(spec);
  Rng rng(spec.seed);

  SimData out;
  auto sparse = gen_sparse_precision(spec.k, spec.offdiag_density, rng);
  out.truth.C_inv_true = std::move(sparse.value);
  out.realized_density = sparse.realized_density;
  out.density_reached = sparse.density_reached;
  out.truth.R_inv_true = chain_laplacian(spec.d, spec.laplacian_ridge);
  out.truth.W_true =
      gen_lowrank_W(out.truth.R_inv_true, out.truth.C_inv_true, spec.rank, rng);

  Matrix X[3];
  for (auto& x : X) x = rng.normal_matrix(spec.n, spec.d);

  const Matrix signal = X[0] * out.truth.W_true;
  const double sigma2 = entry_variance(signal) / spec.snr;
  require(sigma2 > 0.0 && std::isfinite(sigma2), ErrKind::numeric,
          "gen_dataset: degenerate signal variance");
  out.truth.sigma2_true = sigma2;

  const double sd = std::sqrt(sigma2);
  Matrix Y[3];
  Y[0] = signal + sd * rng.normal_matrix(spec.n, spec.k);
  for (int s = 1; s < 3; ++s)
    Y[s] = X[s] * out.truth.W_true + sd * rng.normal_matrix(spec.n, spec.k);

  out.train = make_dataset(std::move(X[0]), std::move(Y[0]));
  out.val = make_dataset(std::move(X[1]), std::move(Y[1]));
  out.test = make_dataset(std::move(X[2]), std::move(Y[2]));
  return out;
}

void write_sim_files(const std::string& dir, const SimSpec& spec,
                     const SimData& data) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(dir, ec);
  require(!ec, ErrKind::io, "cannot create output directory: " + dir);

  std::vector<fs::path> written;
  const auto emit = [&](const std::string& name, const Matrix& m) {
    const fs::path p = fs::path(dir) / name;
    write_csv_matrix(p.string(), m);
    written.push_back(p);
  };

  try {
    emit("X_train.csv", data.train.X);
    emit("Y_train.csv", data.train.Y);
    emit("X_val.csv", data.val.X);
    emit("Y_val.csv", data.val.Y);
    emit("X_test.csv", data.test.X);
    emit("Y_test.csv", data.test.Y);
    emit("W_true.csv", data.truth.W_true);
    emit("C_inv_true.csv", data.truth.C_inv_true);
    emit("R_inv_true.csv", data.truth.R_inv_true);

    nlohmann::json meta;
    meta["n"] = spec.n;
    meta["d"] = spec.d;
    meta["k"] = spec.k;
    meta["rank"] = spec.rank;
    meta["snr"] = spec.snr;
    meta["snr_definition"] = "entry variance of X_train W over sigma2";
    meta["offdiag_density_target"] = spec.offdiag_density;
    meta["realized_density"] = data.realized_density;
    meta["density_reached"] = data.density_reached;
    meta["laplacian_ridge"] = spec.laplacian_ridge;
    meta["seed"] = spec.seed;
    meta["sigma2_true"] = data.truth.sigma2_true;
    const fs::path mp = fs::path(dir) / "sim_meta.json";
    written.push_back(mp);
    write_text_file(mp.string(), meta.dump(2) + "\n");
  } catch (...) {
    for (const auto& p : written) fs::remove(p, ec);
    throw;
  }
}

}  // namespace kronmtl
