#include "core/experiment.hpp"

#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <thread>

#include "core/csv.hpp"
#include "core/linalg.hpp"
#include "core/matvar.hpp"

namespace fs = std::filesystem;

namespace kronmtl {

const char* model_name(ModelKind m) {
  switch (m) {
    case ModelKind::glasso: return "glasso";
    case ModelKind::ridge: return "ridge";
    case ModelKind::nucnorm: return "nucnorm";
    case ModelKind::mvg: return "mvg";
    case ModelKind::mvg_corr: return "mvg-corr";
    case ModelKind::mvg_rank: return "mvg-rank";
  }
  fail(ErrKind::invalid_argument, "model_name: unknown model kind");
}

ModelKind model_from_name(const std::string& name) {
  for (ModelKind m : {ModelKind::glasso, ModelKind::ridge, ModelKind::nucnorm,
                      ModelKind::mvg, ModelKind::mvg_corr, ModelKind::mvg_rank})
    if (name == model_name(m)) return m;
  fail(ErrKind::config, "unknown model: " + name);
}

bool model_is_predictive(ModelKind m) { return m != ModelKind::glasso; }

bool model_is_structural(ModelKind m) {
  return m == ModelKind::glasso || m == ModelKind::mvg ||
         m == ModelKind::mvg_corr || m == ModelKind::mvg_rank;
}

void validate_experiment_config(const ExperimentConfig& cfg) {
  validate_spec(cfg.sim);
  require(cfg.reps >= 1, ErrKind::config, "experiment: reps must be at least 1");
  require(!cfg.lambda_grid.empty(), ErrKind::config,
          "experiment: lambda_grid must be nonempty");
  for (double l : cfg.lambda_grid)
    require(l > 0.0 && std::isfinite(l), ErrKind::config,
            "experiment: lambda_grid values must be positive");
  require(!cfg.models.empty(), ErrKind::config,
          "experiment: models must be nonempty");
  for (size_t a = 0; a < cfg.models.size(); ++a)
    for (size_t b = a + 1; b < cfg.models.size(); ++b)
      require(cfg.models[a] != cfg.models[b], ErrKind::config,
              "experiment: duplicate model " +
                  std::string(model_name(cfg.models[a])));
  require(cfg.edge_threshold >= 0.0 && std::isfinite(cfg.edge_threshold),
          ErrKind::config, "experiment: edge_threshold must be nonnegative");
  require(cfg.edge_stability_fraction > 0.0 && cfg.edge_stability_fraction <= 1.0,
          ErrKind::config,
          "experiment: edge_stability_fraction must be in (0, 1]");
  if (cfg.gamma)
    require(*cfg.gamma >= 0.0 && std::isfinite(*cfg.gamma), ErrKind::config,
            "experiment: gamma must be nonnegative");
  require(cfg.fit_outer_tol > 0.0, ErrKind::config,
          "experiment: fit_outer_tol must be positive");
  require(cfg.fit_outer_max_iter >= 1, ErrKind::config,
          "experiment: fit_outer_max_iter must be at least 1");
}

Matrix argmax_onehot(const Matrix& scores) {
  Matrix out = Matrix::Zero(scores.rows(), scores.cols());
  for (Eigen::Index r = 0; r < scores.rows(); ++r) {
    Eigen::Index best = 0;
    for (Eigen::Index j = 1; j < scores.cols(); ++j)
      if (scores(r, j) > scores(r, best)) best = j;
    out(r, best) = 1.0;
  }
  return out;
}

namespace {

struct PreparedData {
  Dataset train;  // column-centered (one-hot first in classification mode)
  Matrix val_X, val_Y;
  Matrix test_X, test_Y;
  Matrix val_Y_centered;  // val responses minus training column means
  SimTruth truth;
};

PreparedData prepare_rep(const ExperimentConfig& cfg, int rep) {
  SimSpec s = cfg.sim;
  s.seed = cfg.seed + static_cast<std::uint64_t>(rep);
  SimData data = gen_dataset(s);

  PreparedData p;
  p.truth = std::move(data.truth);
  Matrix Ytr = std::move(data.train.Y);
  Matrix Yv = std::move(data.val.Y);
  Matrix Yte = std::move(data.test.Y);
  if (cfg.mode == TaskMode::classification) {
    // Class labels come from the noiseless signal X W_true: each row's class
    // is the condition that generated it, not the argmax of a noisy response.
    Ytr = argmax_onehot(data.train.X * p.truth.W_true);
    Yv = argmax_onehot(data.val.X * p.truth.W_true);
    Yte = argmax_onehot(data.test.X * p.truth.W_true);
  }
  p.train = center_columns(make_dataset(std::move(data.train.X), std::move(Ytr)));
  p.val_X = std::move(data.val.X);
  p.val_Y = std::move(Yv);
  p.test_X = std::move(data.test.X);
  p.test_Y = std::move(Yte);
  p.val_Y_centered = p.val_Y.rowwise() - p.train.column_means.transpose();
  return p;
}

// Validation / test score for a mean estimate: held-out R^2 in regression,
// 1-of-K accuracy in classification. NaN marks an undefined metric.
double predictive_score(const ExperimentConfig& cfg, const PreparedData& p,
                        const Matrix& M, const Matrix& X, const Matrix& Y) {
  const Matrix pred = predict(M, X, p.train.column_means, true);
  if (cfg.mode == TaskMode::classification) return accuracy_1ofk(Y, pred).value;
  const auto r2 = r_squared(Y, pred, p.train.column_means);
  return r2 ? *r2 : std::numeric_limits<double>::quiet_NaN();
}

template <class Artifact>
bool record_failure(CellResult& cell, const GridPick<Artifact>& pick) {
  if (pick.index >= 0) return false;
  cell.error = "all grid values failed";
  for (const auto& f : pick.failures)
    if (!f.empty()) {
      cell.error += ": " + f;
      break;
    }
  return true;
}

}  // namespace

CellResult run_experiment_cell(const ExperimentConfig& cfg, ModelKind model,
                               int rep) {
  CellResult cell;
  cell.model = model;
  cell.rep = rep;
  try {
    const PreparedData p = prepare_rep(cfg, rep);
    const auto& grid = cfg.lambda_grid;

    const auto record_predictive = [&](const Matrix& M) {
      const double s = predictive_score(cfg, p, M, p.test_X, p.test_Y);
      if (std::isnan(s)) return;
      if (cfg.mode == TaskMode::classification)
        cell.accuracy = s;
      else
        cell.r2 = s;
    };
    const auto record_structural = [&](const Matrix& C_inv_est) {
      cell.auc = structure_auc(p.truth.C_inv_true, C_inv_est, cfg.edge_threshold).value;
      cell.C_inv_est = C_inv_est;
    };

    if (model == ModelKind::ridge) {
      auto pick = grid_select<Matrix>(
          grid, [&](double l) { return ridge_fit(p.train, l); },
          [&](const Matrix& M) {
            return predictive_score(cfg, p, M, p.val_X, p.val_Y);
          });
      if (record_failure(cell, pick)) return cell;
      cell.lambda = pick.lambda;
      cell.converged = true;
      record_predictive(pick.artifact);
    } else if (model == ModelKind::nucnorm) {
      PriorPrecisions none;
      none.R_inv = Matrix::Zero(p.train.d(), p.train.d());
      none.C_inv = Matrix::Zero(p.train.k(), p.train.k());
      MeanProblem prob = make_mean_problem(p.train, none, 1.0, 0.0);
      Matrix warm;  // previous grid value's solution (grid runs ascending)
      auto pick = grid_select<MeanSolveResult>(
          grid,
          [&](double l) {
            prob.gamma = l;
            auto r = solve_mean(prob, MeanSolveConfig{},
                                warm.size() ? &warm : nullptr);
            warm = r.M;
            return r;
          },
          [&](const MeanSolveResult& r) {
            return predictive_score(cfg, p, r.M, p.val_X, p.val_Y);
          });
      if (record_failure(cell, pick)) return cell;
      cell.lambda = pick.lambda;
      cell.converged = pick.artifact.converged;
      record_predictive(pick.artifact.M);
    } else if (model == ModelKind::glasso) {
      const Matrix S = sample_covariance(p.train.Y);
      Matrix warm;
      auto pick = grid_select<GlassoResult>(
          grid,
          [&](double l) {
            auto r = glasso(S, l, GlassoConfig{}, warm.size() ? &warm : nullptr);
            warm = r.theta;
            return r;
          },
          [&](const GlassoResult& r) {
            return gaussian_holdout_loglik(p.val_Y_centered, spd_inverse(r.theta));
          });
      if (record_failure(cell, pick)) return cell;
      cell.lambda = pick.lambda;
      cell.converged = pick.artifact.converged;
      record_structural(pick.artifact.theta);
    } else {
      FitConfig fc;
      fc.variant = model == ModelKind::mvg       ? Variant::mvg
                   : model == ModelKind::mvg_corr ? Variant::mvg_corr
                                                  : Variant::mvg_rank;
      fc.fixed_row_precision = p.truth.R_inv_true;
      fc.outer_tol = cfg.fit_outer_tol;
      fc.outer_max_iter = cfg.fit_outer_max_iter;
      fc.sigma2_denominator = cfg.sigma2_denominator;
      if (cfg.mode == TaskMode::classification) {
        // The Gaussian noise scale of a one-hot encoding is a device, not a
        // quantity to estimate: its ML update is degenerate once the mean can
        // interpolate the labels. Hold it at the default unit scale.
        fc.fix_sigma2 = true;
        fc.sigma2_init = 1.0;
      }
      const FitWorkspace ws = make_fit_workspace(p.train, fc);
      auto pick = grid_select<FitResult>(
          grid,
          [&](double l) {
            Hyperparams hp;
            hp.lambda_c = l;
            hp.lambda_r = cfg.tie_lambdas ? l : 0.0;
            // gamma is not swept: the rank variant keeps its default weight
            // (overridable via the experiment config), the others use none.
            hp.gamma =
                model == ModelKind::mvg_rank ? cfg.gamma.value_or(1.0) : 0.0;
            return fit(p.train, hp, fc, &ws);
          },
          [&](const FitResult& r) {
            return predictive_score(cfg, p, r.post.M, p.val_X, p.val_Y);
          });
      if (record_failure(cell, pick)) return cell;
      cell.lambda = pick.lambda;
      cell.converged = pick.artifact.report.converged;
      record_predictive(pick.artifact.post.M);
      record_structural(pick.artifact.prior.C_inv);
    }
  } catch (const std::exception& e) {
    cell.error = e.what();
  }
  return cell;
}

int experiment_thread_cap() {
  if (const char* env = std::getenv("KRONMTL_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    require(end != env && end && *end == '\0' && v >= 1 && v <= 4096,
            ErrKind::config, "KRONMTL_THREADS must be a positive integer");
    return static_cast<int>(v);
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw ? static_cast<int>(hw) : 1;
}

namespace {

void aggregate(ExperimentResult& res) {
  const auto& cfg = res.cfg;
  const int reps = cfg.reps;

  const auto add_metric = [&](ModelKind model, int mi, const char* metric,
                              auto getter) {
    std::vector<double> vals;
    for (int r = 0; r < reps; ++r) {
      const CellResult& c = res.cells[static_cast<size_t>(mi) * reps + r];
      if (!c.error.empty()) continue;
      if (const auto v = getter(c)) vals.push_back(*v);
    }
    if (vals.empty()) return;
    double mean = 0.0;
    for (double v : vals) mean += v;
    mean /= static_cast<double>(vals.size());
    double var = 0.0;
    if (vals.size() >= 2) {
      for (double v : vals) var += (v - mean) * (v - mean);
      var /= static_cast<double>(vals.size() - 1);
    }
    res.summary.push_back(
        {model, metric, mean, std::sqrt(var), static_cast<int>(vals.size())});
  };

  for (int mi = 0; mi < static_cast<int>(cfg.models.size()); ++mi) {
    const ModelKind model = cfg.models[mi];
    if (model_is_predictive(model)) {
      if (cfg.mode == TaskMode::classification)
        add_metric(model, mi, "accuracy",
                   [](const CellResult& c) { return c.accuracy; });
      else
        add_metric(model, mi, "r2", [](const CellResult& c) { return c.r2; });
    }
    if (model_is_structural(model))
      add_metric(model, mi, "auc", [](const CellResult& c) { return c.auc; });
  }

  for (ModelKind cand : {ModelKind::mvg_rank, ModelKind::mvg_corr, ModelKind::mvg,
                         ModelKind::glasso}) {
    for (int mi = 0; mi < static_cast<int>(cfg.models.size()); ++mi) {
      if (cfg.models[mi] != cand) continue;
      res.edge_model = cand;
      res.edge_counts = Eigen::MatrixXi::Zero(cfg.sim.k, cfg.sim.k);
      for (int r = 0; r < reps; ++r) {
        const CellResult& c = res.cells[static_cast<size_t>(mi) * reps + r];
        if (!c.error.empty() || c.C_inv_est.size() == 0) continue;
        for (int j = 1; j < cfg.sim.k; ++j)
          for (int i = 0; i < j; ++i)
            if (std::abs(c.C_inv_est(i, j)) > cfg.edge_threshold)
              ++res.edge_counts(i, j);
      }
      return;
    }
  }
}

}  // namespace

ExperimentResult run_experiment(const ExperimentConfig& cfg) {
  validate_experiment_config(cfg);

  ExperimentResult res;
  res.cfg = cfg;
  const int n_units = static_cast<int>(cfg.models.size()) * cfg.reps;
  res.cells.resize(n_units);

  std::atomic<int> next{0};
  const auto work = [&] {
    for (;;) {
      const int u = next.fetch_add(1);
      if (u >= n_units) break;
      const int mi = u / cfg.reps;
      const int rep = u % cfg.reps + 1;
      res.cells[u] = run_experiment_cell(cfg, cfg.models[mi], rep);
    }
  };

  const int threads = std::min(n_units, experiment_thread_cap());
  if (threads <= 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(threads - 1);
    for (int t = 0; t < threads - 1; ++t) pool.emplace_back(work);
    work();
    for (auto& th : pool) th.join();
  }

  aggregate(res);
  return res;
}

void write_experiment_csvs(const std::string& dir, const ExperimentResult& res) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  require(!ec, ErrKind::io, "cannot create output directory: " + dir);

  const auto opt = [](const std::optional<double>& v) {
    return v ? format_double(*v) : std::string();
  };
  std::string results = "model,rep,lambda,r2,auc,accuracy,converged\n";
  for (const auto& c : res.cells) {
    results += model_name(c.model);
    results += ',';
    results += std::to_string(c.rep);
    results += ',';
    results += c.error.empty() ? format_double(c.lambda) : std::string();
    results += ',';
    results += opt(c.r2);
    results += ',';
    results += opt(c.auc);
    results += ',';
    results += opt(c.accuracy);
    results += ',';
    results += c.converged ? '1' : '0';
    results += '\n';
  }
  write_text_file((fs::path(dir) / "results.csv").string(), results);

  std::string summary = "model,metric,mean,std\n";
  for (const auto& s : res.summary) {
    summary += model_name(s.model);
    summary += ',' + s.metric + ',' + format_double(s.mean) + ',' +
               format_double(s.stddev) + '\n';
  }
  write_text_file((fs::path(dir) / "summary.csv").string(), summary);

  std::string edges = "i,j,count,stable\n";
  if (res.edge_model) {
    const double cutoff = res.cfg.edge_stability_fraction * res.cfg.reps;
    for (int j = 1; j < res.edge_counts.cols(); ++j)
      for (int i = 0; i < j; ++i) {
        const int c = res.edge_counts(i, j);
        edges += std::to_string(i) + ',' + std::to_string(j) + ',' +
                 std::to_string(c) + ',' +
                 (static_cast<double>(c) + 1e-9 >= cutoff ? "1" : "0") + '\n';
      }
  }
  write_text_file((fs::path(dir) / "edges.csv").string(), edges);
}

std::string summary_text(const ExperimentResult& res) {
  std::string out = "model      metric      mean       std   reps\n";
  char buf[128];
  for (const auto& s : res.summary) {
    std::snprintf(buf, sizeof buf, "%-10s %-8s %9.4f %9.4f %6d\n",
                  model_name(s.model), s.metric.c_str(), s.mean, s.stddev,
                  s.count);
    out += buf;
  }
  for (const auto& c : res.cells)
    if (!c.error.empty()) {
      std::snprintf(buf, sizeof buf, "failed: %s rep %d: ", model_name(c.model),
                    c.rep);
      out += buf;
      out += c.error;
      out += '\n';
    }
  return out;
}

}  // namespace kronmtl
