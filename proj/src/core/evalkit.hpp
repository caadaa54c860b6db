#pragma once

#include <algorithm>
#include <limits>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "core/glasso.hpp"
#include "core/nuclear_mean.hpp"
#include "core/types.hpp"

namespace kronmtl {

// Pooled over all N*K entries, with the total sum of squares measured
// against the per-column training means. nullopt when that sum is zero.
std::optional<double> r_squared(const Matrix& Y_true, const Matrix& Y_pred,
                                const Vector& train_col_means);

struct AucResult {
  double value = 0.5;
  bool degenerate = false;  // one class empty; value pinned at 0.5
};

// Support-recovery ranking quality over the strict upper triangle: labels
// are |true_ij| > threshold, scores are |est_ij|, area via the rank-sum
// formula with mid-ranks on tied scores.
AucResult structure_auc(const Matrix& true_prec, const Matrix& est_prec,
                        double threshold);

struct AccuracyResult {
  double value = 0.0;
  bool ties = false;  // some score row had a tied argmax (lowest index wins)
};

// Fraction of rows whose score argmax hits the one-hot position.
AccuracyResult accuracy_1ofk(const Matrix& Y_true_onehot, const Matrix& Y_scores);

// argmin |Y - X M|_F^2 + lambda |M|_F^2 via whichever of the D x D and
// N x N normal systems is smaller.
Matrix ridge_fit(const Dataset& data, double lambda);

// |Y - X M|_F^2 + lambda |M|_*: the mean solver with unit noise variance
// and no prior coupling.
MeanSolveResult nucnorm_fit(const Dataset& data, double lambda,
                            const MeanSolveConfig& cfg = {});

// Mean-centered second moment of the rows, divisor N.
Matrix sample_covariance(const Matrix& Y);

GlassoResult glasso_baseline(const Matrix& Y_train, double lambda,
                             const GlassoConfig& cfg = {});

template <class Artifact>
struct GridPick {
  int index = -1;  // -1 when every grid cell failed
  double lambda = 0.0;
  double score = -std::numeric_limits<double>::infinity();
  Artifact artifact{};
  std::vector<double> scores;         // per grid entry; -inf where failed
  std::vector<std::string> failures;  // per grid entry; empty where fine
};

// Fits every grid value and keeps the best validation score. Cells are
// visited in ascending lambda order and replaced only on strict improvement,
// so ties resolve to the smaller lambda whatever the grid ordering. A cell
// that throws or scores NaN is recorded and treated as -inf.
template <class Artifact, class FitFn, class ScoreFn>
GridPick<Artifact> grid_select(const std::vector<double>& grid, FitFn&& fit,
                               ScoreFn&& score) {
  require(!grid.empty(), ErrKind::invalid_argument, "grid_select: empty grid");
  std::vector<int> order(grid.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return grid[a] < grid[b]; });

  GridPick<Artifact> pick;
  pick.scores.assign(grid.size(), -std::numeric_limits<double>::infinity());
  pick.failures.assign(grid.size(), std::string());
  for (int idx : order) {
    try {
      Artifact art = fit(grid[idx]);
      const double s = score(art);
      if (std::isnan(s)) {
        pick.failures[idx] = "validation metric undefined";
        continue;
      }
      pick.scores[idx] = s;
      if (pick.index < 0 || s > pick.score) {
        pick.index = idx;
        pick.lambda = grid[idx];
        pick.score = s;
        pick.artifact = std::move(art);
      }
    } catch (const std::exception& e) {
      pick.failures[idx] = e.what();
    }
  }
  return pick;
}

}  // namespace kronmtl
