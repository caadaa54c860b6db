#include "kronmtl/kronmtl.h"

#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <json.hpp>
#include <new>
#include <string>

#include "core/config.hpp"
#include "core/csv.hpp"
#include "core/evalkit.hpp"
#include "core/experiment.hpp"
#include "core/fit.hpp"
#include "core/linalg.hpp"
#include "core/model_io.hpp"
#include "core/simgen.hpp"

namespace fs = std::filesystem;
using namespace kronmtl;

struct kmtl_model {
  ModelBundle bundle;
};

namespace {

thread_local std::string g_last_error;

kmtl_status status_of(ErrKind k) {
  switch (k) {
    case ErrKind::invalid_argument: return KMTL_ERR_INVALID;
    case ErrKind::config: return KMTL_ERR_CONFIG;
    case ErrKind::io: return KMTL_ERR_IO;
    case ErrKind::numeric: return KMTL_ERR_NUMERIC;
  }
  return KMTL_ERR_INVALID;
}

template <class F>
kmtl_status guarded(F&& body) noexcept {
  try {
    body();
    return KMTL_OK;
  } catch (const Error& e) {
    g_last_error = e.what();
    return status_of(e.kind);
  } catch (const std::bad_alloc&) {
    g_last_error = "out of memory";
    return KMTL_ERR_NUMERIC;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return KMTL_ERR_INVALID;
  } catch (...) {
    g_last_error = "unknown failure";
    return KMTL_ERR_INVALID;
  }
}

void give_string(char** out, const std::string& s) {
  if (!out) return;
  char* p = static_cast<char*>(std::malloc(s.size() + 1));
  if (!p) throw std::bad_alloc();
  std::memcpy(p, s.c_str(), s.size() + 1);
  *out = p;
}

std::string read_config_or_default(const char* path) {
  return path ? read_text_file(path) : std::string("{}");
}

using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

Matrix matrix_from_c(const double* p, int rows, int cols, const std::string& what) {
  require(p != nullptr, ErrKind::invalid_argument, what + ": null buffer");
  require(rows >= 1 && cols >= 1, ErrKind::invalid_argument,
          what + ": dimensions must be positive");
  return Eigen::Map<const RowMajor>(p, rows, cols);
}

void matrix_to_c(const Matrix& m, double* out, const std::string& what) {
  require(out != nullptr, ErrKind::invalid_argument, what + ": null buffer");
  Eigen::Map<RowMajor>(out, m.rows(), m.cols()) = m;
}

std::string resolve_against(const std::string& base, const std::string& path) {
  const fs::path p(path);
  return p.is_absolute() ? path : (fs::path(base) / p).string();
}

const kmtl_model* checked(const kmtl_model* m) {
  require(m != nullptr, ErrKind::invalid_argument, "null model handle");
  return m;
}

struct FitOutcome {
  ModelBundle bundle;
  FitReport report;
};

// Shared by the file and buffer entry points: centering, fixed-precision
// loading (relative paths against precision_base), the fit itself.
FitOutcome run_fit(FitSettings settings, Dataset raw,
                   const std::string& precision_base) {
  const Dataset train = settings.center ? center_columns(raw) : std::move(raw);
  if (settings.fixed_row_precision_path)
    settings.fit.fixed_row_precision = read_csv_matrix(
        resolve_against(precision_base, *settings.fixed_row_precision_path));
  if (settings.fixed_col_precision_path)
    settings.fit.fixed_col_precision = read_csv_matrix(
        resolve_against(precision_base, *settings.fixed_col_precision_path));
  settings.fit.variant = settings.variant;
  FitResult r = fit(train, settings.hp, settings.fit);
  FitOutcome out;
  out.report = r.report;
  out.bundle = make_bundle(train, r, settings.variant);
  return out;
}

std::string fit_info(const FitOutcome& o) {
  std::string s = "variant=";
  s += variant_name(o.bundle.variant);
  s += "\nconverged=";
  s += o.bundle.converged ? "yes" : "no";
  s += " outer_iters=" + std::to_string(o.report.outer_iters);
  s += "\nobjective=" + format_double(o.bundle.objective_final);
  s += "\nsigma2=" + format_double(o.bundle.hp.sigma2);
  s += "\nelapsed_seconds=" + format_double(o.report.elapsed_seconds);
  s += '\n';
  return s;
}

}  // namespace

extern "C" {

const char* kmtl_version(void) { return "1.0.0"; }

const char* kmtl_last_error(void) { return g_last_error.c_str(); }

void kmtl_string_free(char* s) { std::free(s); }

kmtl_status kmtl_simulate(const char* config_path, const char* out_dir,
                          int has_seed, uint64_t seed, char** info_out) {
  return guarded([&] {
    require(out_dir != nullptr, ErrKind::invalid_argument, "simulate: null out_dir");
    SimSpec spec = parse_sim_config(read_config_or_default(config_path));
    if (has_seed) spec.seed = seed;
    const SimData data = gen_dataset(spec);
    write_sim_files(out_dir, spec, data);

    std::string info = "wrote 9 matrices and sim_meta.json to ";
    info += out_dir;
    info += "\nN=" + std::to_string(spec.n) + " D=" + std::to_string(spec.d) +
            " K=" + std::to_string(spec.k) + " rank=" + std::to_string(spec.rank);
    info += "\nsigma2_true=" + format_double(data.truth.sigma2_true);
    info += "\nrealized_density=" + format_double(data.realized_density) +
            " (target " + format_double(spec.offdiag_density) + ")";
    if (!data.density_reached) info += " [closest reachable]";
    info += '\n';
    give_string(info_out, info);
  });
}

kmtl_status kmtl_fit_files(const char* config_path, const char* data_dir,
                           const char* model_out_dir, const char* variant,
                           char** info_out) {
  return guarded([&] {
    require(data_dir != nullptr && model_out_dir != nullptr,
            ErrKind::invalid_argument, "fit: null path");
    FitSettings settings = parse_fit_config(read_config_or_default(config_path));
    if (variant) settings.variant = variant_from_name(variant);
    Dataset raw = make_dataset(
        read_csv_matrix((fs::path(data_dir) / "X_train.csv").string()),
        read_csv_matrix((fs::path(data_dir) / "Y_train.csv").string()));
    const FitOutcome o = run_fit(std::move(settings), std::move(raw), data_dir);
    save_model(model_out_dir, o.bundle);
    give_string(info_out,
                fit_info(o) + "model written to " + model_out_dir + "\n");
  });
}

kmtl_status kmtl_predict_files(const char* model_dir, const char* x_path,
                               const char* out_path, char** info_out) {
  return guarded([&] {
    require(model_dir != nullptr && x_path != nullptr && out_path != nullptr,
            ErrKind::invalid_argument, "predict: null path");
    const ModelBundle b = load_model(model_dir);
    const Matrix X = read_csv_matrix(x_path);
    require(X.cols() == b.d, ErrKind::config,
            "predict: X has " + std::to_string(X.cols()) +
                " columns, the model expects " + std::to_string(b.d));
    const Matrix Yhat = predict(b.post.M, X, b.column_means, b.centered);
    write_csv_matrix(out_path, Yhat);
    give_string(info_out, "wrote " + std::to_string(Yhat.rows()) + " x " +
                              std::to_string(Yhat.cols()) + " predictions to " +
                              out_path + "\n");
  });
}

kmtl_status kmtl_evaluate_files(const char* metric, const char* truth_path,
                                const char* pred_path, const char* means_path,
                                double threshold, const char* out_path,
                                char** info_out) {
  return guarded([&] {
    require(metric != nullptr && truth_path != nullptr && pred_path != nullptr,
            ErrKind::invalid_argument, "evaluate: null argument");
    const Matrix T = read_csv_matrix(truth_path);
    const Matrix P = read_csv_matrix(pred_path);
    const std::string name(metric);

    double value = 0.0;
    bool have_value = true;
    std::string text;
    if (name == "r2") {
      Vector means;
      if (means_path) {
        const Matrix M = read_csv_matrix(means_path);
        require(M.rows() == 1 || M.cols() == 1, ErrKind::config,
                "evaluate: means must be a single row or column");
        means = M.rows() == 1 ? Vector(M.transpose()) : Vector(M);
      } else {
        means = T.colwise().mean().transpose();
      }
      const auto r2 = r_squared(T, P, means);
      if (r2) {
        value = *r2;
        text = "r2=" + format_double(value);
      } else {
        have_value = false;
        text = "r2=undefined (zero total sum of squares)";
      }
    } else if (name == "auc") {
      const auto a = structure_auc(T, P, threshold);
      value = a.value;
      text = "auc=" + format_double(value);
      if (a.degenerate) text += " (degenerate: one class empty)";
    } else if (name == "accuracy") {
      const auto a = accuracy_1ofk(T, P);
      value = a.value;
      text = "accuracy=" + format_double(value);
      if (a.ties) text += " (ties broken by lowest index)";
    } else {
      fail(ErrKind::config, "evaluate: unknown metric '" + name +
                                "' (expected r2, auc or accuracy)");
    }

    if (out_path)
      write_text_file(out_path,
                      (have_value ? format_double(value) : "nan") + "\n");
    give_string(info_out, text + "\n");
  });
}

kmtl_status kmtl_glasso_file(const char* s_path, double lambda,
                             const char* out_path, char** info_out) {
  return guarded([&] {
    require(s_path != nullptr && out_path != nullptr, ErrKind::invalid_argument,
            "glasso: null path");
    const Matrix S = read_csv_matrix(s_path);
    const GlassoResult r = glasso(S, lambda);
    write_csv_matrix(out_path, r.theta);
    std::string info = "kkt_residual=" + format_double(r.kkt_residual);
    info += " converged=";
    info += r.converged ? "yes" : "no";
    info += " iters=" + std::to_string(r.iters);
    info += "\nwrote precision estimate to ";
    info += out_path;
    info += '\n';
    give_string(info_out, info);
  });
}

kmtl_status kmtl_experiment(const char* config_path, const char* out_dir,
                            int has_seed, uint64_t seed, char** info_out) {
  return guarded([&] {
    require(out_dir != nullptr, ErrKind::invalid_argument,
            "experiment: null out_dir");
    ExperimentConfig cfg = parse_experiment_config(read_config_or_default(config_path));
    if (has_seed) cfg.seed = seed;
    const ExperimentResult res = run_experiment(cfg);
    write_experiment_csvs(out_dir, res);
    give_string(info_out, summary_text(res) + "wrote results.csv, summary.csv, edges.csv to " +
                              out_dir + "\n");
  });
}

kmtl_status kmtl_fit(const double* X, const double* Y, int n, int d, int k,
                     const char* options_json, kmtl_model** model_out) {
  return guarded([&] {
    require(model_out != nullptr, ErrKind::invalid_argument, "fit: null model_out");
    // Null options means "all defaults", which parse_fit_section also
    // resolves (e.g. the variant-dependent gamma).
    FitSettings settings = parse_fit_section(options_json ? options_json : "{}");
    Dataset raw = make_dataset(matrix_from_c(X, n, d, "fit: X"),
                               matrix_from_c(Y, n, k, "fit: Y"));
    FitOutcome o = run_fit(std::move(settings), std::move(raw), ".");
    *model_out = new kmtl_model{std::move(o.bundle)};
  });
}

kmtl_status kmtl_model_load(const char* model_dir, kmtl_model** model_out) {
  return guarded([&] {
    require(model_dir != nullptr && model_out != nullptr,
            ErrKind::invalid_argument, "model_load: null argument");
    *model_out = new kmtl_model{load_model(model_dir)};
  });
}

kmtl_status kmtl_model_save(const kmtl_model* model, const char* model_dir) {
  return guarded([&] {
    require(model_dir != nullptr, ErrKind::invalid_argument,
            "model_save: null path");
    save_model(model_dir, checked(model)->bundle);
  });
}

kmtl_status kmtl_model_dims(const kmtl_model* model, int* d_out, int* k_out) {
  return guarded([&] {
    const kmtl_model* m = checked(model);
    if (d_out) *d_out = m->bundle.d;
    if (k_out) *k_out = m->bundle.k;
  });
}

kmtl_status kmtl_model_mean(const kmtl_model* model, double* out) {
  return guarded([&] {
    matrix_to_c(checked(model)->bundle.post.M, out, "model_mean");
  });
}

kmtl_status kmtl_model_row_cov(const kmtl_model* model, double* out) {
  return guarded([&] {
    matrix_to_c(checked(model)->bundle.post.G, out, "model_row_cov");
  });
}

kmtl_status kmtl_model_col_cov(const kmtl_model* model, double* out) {
  return guarded([&] {
    matrix_to_c(checked(model)->bundle.post.H, out, "model_col_cov");
  });
}

kmtl_status kmtl_model_row_precision(const kmtl_model* model, double* out) {
  return guarded([&] {
    matrix_to_c(checked(model)->bundle.prior.R_inv, out, "model_row_precision");
  });
}

kmtl_status kmtl_model_col_precision(const kmtl_model* model, double* out) {
  return guarded([&] {
    matrix_to_c(checked(model)->bundle.prior.C_inv, out, "model_col_precision");
  });
}

kmtl_status kmtl_model_info(const kmtl_model* model, char** json_out) {
  return guarded([&] {
    const kmtl_model* m = checked(model);
    nlohmann::json j;
    j["variant"] = variant_name(m->bundle.variant);
    j["n"] = m->bundle.n;
    j["d"] = m->bundle.d;
    j["k"] = m->bundle.k;
    j["sigma2"] = m->bundle.hp.sigma2;
    j["gamma"] = m->bundle.hp.gamma;
    j["lambda_r"] = m->bundle.hp.lambda_r;
    j["lambda_c"] = m->bundle.hp.lambda_c;
    j["centered"] = m->bundle.centered;
    j["converged"] = m->bundle.converged;
    j["objective_final"] = m->bundle.objective_final;
    give_string(json_out, j.dump());
  });
}

kmtl_status kmtl_predict(const kmtl_model* model, const double* X, int n,
                         double* y_out) {
  return guarded([&] {
    const kmtl_model* m = checked(model);
    const Matrix Xm = matrix_from_c(X, n, m->bundle.d, "predict: X");
    const Matrix Yhat =
        predict(m->bundle.post.M, Xm, m->bundle.column_means, m->bundle.centered);
    matrix_to_c(Yhat, y_out, "predict: output");
  });
}

void kmtl_model_free(kmtl_model* model) { delete model; }

kmtl_status kmtl_glasso(const double* S, int p, double lambda, double tol,
                        int max_iter, double* theta_out,
                        double* kkt_residual_out, int* converged_out) {
  return guarded([&] {
    GlassoConfig cfg;
    if (tol > 0.0) cfg.tol = tol;
    if (max_iter > 0) cfg.max_iter = max_iter;
    const Matrix Sm = matrix_from_c(S, p, p, "glasso: S");
    const GlassoResult r = glasso(Sm, lambda, cfg);
    matrix_to_c(r.theta, theta_out, "glasso: theta");
    if (kkt_residual_out) *kkt_residual_out = r.kkt_residual;
    if (converged_out) *converged_out = r.converged ? 1 : 0;
  });
}

}  // extern "C"
