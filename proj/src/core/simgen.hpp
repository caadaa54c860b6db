#pragma once

#include <cstdint>

#include "core/rng.hpp"
#include "core/types.hpp"

namespace kronmtl {

// Synthetic multitask regression: low-rank weights drawn under the two prior
// precisions, standard normal design, noise scaled to a target SNR.
struct SimSpec {
  int n = 50;   // samples per split
  int d = 200;  // features
  int k = 10;   // tasks
  int rank = 2;
  double snr = 10.0;  // Var(signal entries) / sigma2
  double offdiag_density = 0.20;  // target nonzero fraction of C_inv off-diagonals
  double laplacian_ridge = 0.01;
  std::uint64_t seed = 0;
};

void validate_spec(const SimSpec& spec);

struct SimTruth {
  Matrix W_true;      // d x k, rank <= spec.rank
  Matrix C_inv_true;  // k x k sparse task precision (the recovery target)
  Matrix R_inv_true;  // d x d chain Laplacian feature precision (held fixed)
  double sigma2_true = 0.0;
};

struct SimData {
  Dataset train;
  Dataset val;
  Dataset test;
  SimTruth truth;
  double realized_density = 0.0;
  bool density_reached = true;  // bisection landed within +-5pp of the target
};

// U U^T plus the smallest diagonal shift that keeps the minimum eigenvalue at
// or above 1e-3, with a further 1e-3 margin. U = 0 gives 2e-3 * I.
Matrix pd_gram(const Matrix& U);

struct SparsePrecision {
  Matrix value;  // k x k SPD
  double realized_density = 0.0;
  bool density_reached = true;
};

// Sparse +-1 factor U with entry probability tuned by bisection (50 steps)
// until the nonzero fraction of the off-diagonals of U U^T is within 5
// percentage points of the target; returns pd_gram(U). All candidate
// probabilities reuse one uniform field and one sign field, so the RNG
// stream length does not depend on the bisection path.
SparsePrecision gen_sparse_precision(int k, double offdiag_density, Rng& rng);
SparsePrecision gen_sparse_precision(int k, double offdiag_density, std::uint64_t seed);

// Normalized Laplacian of the path graph 1-2-...-d (no self-loops) plus
// ridge * I. Eigenvalues of the Laplacian itself lie in [0, 2] with exactly
// one zero, so the ridge is what makes the result invertible.
Matrix chain_laplacian(int d, double ridge);

// A B^T where the columns of A are i.i.d. N(0, R_inv^{-1}) and the columns
// of B are i.i.d. N(0, C_inv^{-1}). Columns of A are drawn first.
Matrix gen_lowrank_W(const Matrix& R_inv, const Matrix& C_inv, int rank, Rng& rng);
Matrix gen_lowrank_W(const Matrix& R_inv, const Matrix& C_inv, int rank,
                     std::uint64_t seed);

// Three equally sized independent splits over one shared truth. Draw order
// is fixed: sparse precision fields, then A and B, then X for train/val/test,
// then noise for train/val/test. sigma2_true = Var(X_train W entries) / snr.
SimData gen_dataset(const SimSpec& spec);

// X/Y CSVs per split, the three truth matrices, and sim_meta.json. Removes
// whatever it already wrote when a write fails partway.
void write_sim_files(const std::string& dir, const SimSpec& spec,
                     const SimData& data);

}  // namespace kronmtl
