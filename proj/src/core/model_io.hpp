#pragma once

#include <string>

#include "core/fit.hpp"
#include "core/types.hpp"

namespace kronmtl {

// Everything needed to reuse a fitted model later: posterior state, learned
// precisions, hyperparameters, centering info and training dimensions.
struct ModelBundle {
  Variant variant = Variant::mvg_rank;
  int n = 0, d = 0, k = 0;
  Posterior post;
  PriorPrecisions prior;
  Hyperparams hp;
  bool centered = false;
  Vector column_means;
  bool converged = false;
  double objective_final = 0.0;
};

ModelBundle make_bundle(const Dataset& train, const FitResult& fit, Variant variant);

// Directory layout: M.csv, G.csv, H.csv, R_inv.csv, C_inv.csv, meta.json.
// Writes are all-or-nothing: on failure any files already written are removed.
void save_model(const std::string& dir, const ModelBundle& b);
ModelBundle load_model(const std::string& dir);

}  // namespace kronmtl
