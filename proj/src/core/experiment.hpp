#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "core/evalkit.hpp"
#include "core/fit.hpp"
#include "core/simgen.hpp"

namespace kronmtl {

enum class ModelKind { glasso, ridge, nucnorm, mvg, mvg_corr, mvg_rank };

const char* model_name(ModelKind m);
ModelKind model_from_name(const std::string& name);
bool model_is_predictive(ModelKind m);  // produces a mean / predictions
bool model_is_structural(ModelKind m);  // produces a task precision estimate

// Regression scores models by held-out R^2. Classification replaces the
// responses of every split by the one-hot encoding of the class that
// generated each row (the argmax of the noiseless signal X W_true) and
// scores by 1-of-K accuracy; mean-model fits then hold sigma^2 at 1.
enum class TaskMode { regression, classification };

struct ExperimentConfig {
  SimSpec sim;
  int reps = 10;
  std::vector<double> lambda_grid = {1e-3, 1e-2, 1e-1, 1.0, 1e1, 1e2, 1e3};
  std::vector<ModelKind> models = {ModelKind::glasso,  ModelKind::ridge,
                                   ModelKind::nucnorm, ModelKind::mvg,
                                   ModelKind::mvg_corr, ModelKind::mvg_rank};
  // The grid value always sets the task precision penalty; with tie_lambdas
  // it also sets the (inert, since the row precision is held fixed) row
  // penalty, and for mvg-rank the nuclear weight unless gamma pins it.
  bool tie_lambdas = true;
  std::optional<double> gamma;
  double edge_threshold = 1e-6;
  double edge_stability_fraction = 0.7;
  TaskMode mode = TaskMode::regression;
  std::uint64_t seed = 0;
  Sigma2Denominator sigma2_denominator = Sigma2Denominator::nd;
  double fit_outer_tol = 1e-6;
  int fit_outer_max_iter = 100;
};

void validate_experiment_config(const ExperimentConfig& cfg);

// One (model, rep) cell at its selected grid value. error nonempty means
// the whole cell failed (every grid value); metrics are then absent.
struct CellResult {
  ModelKind model = ModelKind::ridge;
  int rep = 0;  // 1-based
  double lambda = 0.0;
  std::optional<double> r2;
  std::optional<double> auc;
  std::optional<double> accuracy;
  bool converged = false;
  std::string error;
  Matrix C_inv_est;  // structural models only; used for edge counting
};

struct SummaryRow {
  ModelKind model = ModelKind::ridge;
  std::string metric;  // r2 | auc | accuracy
  double mean = 0.0;
  double stddev = 0.0;  // sample (n-1); 0 when a single value
  int count = 0;        // reps that produced the metric
};

struct ExperimentResult {
  ExperimentConfig cfg;
  std::vector<CellResult> cells;  // models in config order, reps ascending
  std::vector<SummaryRow> summary;
  std::optional<ModelKind> edge_model;  // first of mvg-rank, mvg-corr, mvg, glasso
  Eigen::MatrixXi edge_counts;          // K x K, strict upper triangle used
};

// Replaces each row by the one-hot indicator of its argmax (lowest index on
// ties).
Matrix argmax_onehot(const Matrix& scores);

// Data for rep r is generated from seed cfg.seed + r, shared by all models
// of that rep. Fits hold the row precision fixed at the generator's chain
// Laplacian and learn the task precision.
CellResult run_experiment_cell(const ExperimentConfig& cfg, ModelKind model,
                               int rep);

// Runs every (model, rep) cell, in parallel up to KRONMTL_THREADS (default:
// available parallelism), then aggregates in config order. Output is
// independent of the thread count: cells are self-contained and land in
// preassigned slots.
ExperimentResult run_experiment(const ExperimentConfig& cfg);

// results.csv, summary.csv, edges.csv. edges.csv lists the strict upper
// triangle (0-based i < j) with the rep count of |C_inv_ij| > threshold and
// the stability cutoff flag; header only when no structural model ran.
void write_experiment_csvs(const std::string& dir, const ExperimentResult& res);

std::string summary_text(const ExperimentResult& res);

// KRONMTL_THREADS when set (positive integer), else hardware concurrency.
int experiment_thread_cap();

}  // namespace kronmtl
