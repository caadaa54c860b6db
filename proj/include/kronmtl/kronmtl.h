/* kronmtl: multitask linear regression with a Kronecker-factored posterior,
 * a nuclear norm penalized mean, and graphical-lasso-sparse prior precisions.
 *
 * Conventions:
 *   - All matrix buffers are dense double, row-major.
 *   - Matrix files are comma-separated decimal text, one row per line,
 *     no header; values round-trip through 17 significant digits.
 *   - Functions return KMTL_OK (0) on success. On failure the return value
 *     classifies the problem and kmtl_last_error() carries a message for
 *     the calling thread.
 *   - Strings handed back through char** are heap allocations owned by the
 *     caller; release them with kmtl_string_free. Output pointers may be
 *     NULL when the caller does not want the value.
 */

#ifndef KRONMTL_H
#define KRONMTL_H

#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum kmtl_status {
  KMTL_OK = 0,
  KMTL_ERR_INVALID = 1, /* bad arguments / API misuse */
  KMTL_ERR_CONFIG = 2,  /* configuration or input validation */
  KMTL_ERR_IO = 3,      /* file system */
  KMTL_ERR_NUMERIC = 4  /* numerical failure (matrix not PD, ...) */
} kmtl_status;

const char* kmtl_version(void);

/* Message for the most recent failure on the calling thread ("" so far). */
const char* kmtl_last_error(void);

void kmtl_string_free(char* s);

/* ---------------- file-level workflows ----------------
 *
 * Configuration files are JSON documents with optional "sim", "fit" and
 * "experiment" sections; unknown keys are rejected. A NULL config_path
 * means all defaults. info_out receives a human-readable report.
 */

/* Writes X/Y CSVs for the train/val/test splits, W_true.csv,
 * C_inv_true.csv, R_inv_true.csv and sim_meta.json into out_dir.
 * has_seed != 0 overrides the configured seed. */
kmtl_status kmtl_simulate(const char* config_path, const char* out_dir,
                          int has_seed, uint64_t seed, char** info_out);

/* Reads X_train.csv / Y_train.csv from data_dir, fits the configured
 * variant, and writes the model directory (M.csv, G.csv, H.csv, R_inv.csv,
 * C_inv.csv, meta.json). Relative fixed-precision paths in the config
 * resolve against data_dir. variant, when non-NULL, overrides the config
 * ("mvg" | "mvg-corr" | "mvg-rank"). */
kmtl_status kmtl_fit_files(const char* config_path, const char* data_dir,
                           const char* model_out_dir, const char* variant,
                           char** info_out);

/* Reads a model directory and an X CSV, writes the prediction CSV. */
kmtl_status kmtl_predict_files(const char* model_dir, const char* x_path,
                               const char* out_path, char** info_out);

/* metric is "r2", "auc" or "accuracy".
 *   r2:       truth_path = responses, pred_path = predictions, means_path =
 *             reference column means as a one-row CSV (NULL: column means of
 *             the truth file).
 *   auc:      truth_path = true precision, pred_path = estimated precision;
 *             threshold separates true zero from nonzero entries.
 *   accuracy: truth_path = one-hot responses, pred_path = scores.
 * The value is printed to info_out and, when out_path is non-NULL, written
 * there as a single number. */
kmtl_status kmtl_evaluate_files(const char* metric, const char* truth_path,
                                const char* pred_path, const char* means_path,
                                double threshold, const char* out_path,
                                char** info_out);

/* Sparse precision estimation for the covariance in s_path:
 * minimize tr(S Theta) - ln det Theta + lambda |Theta|_1. */
kmtl_status kmtl_glasso_file(const char* s_path, double lambda,
                             const char* out_path, char** info_out);

/* Runs the replicated simulation benchmark and writes results.csv,
 * summary.csv and edges.csv into out_dir. The KRONMTL_THREADS environment
 * variable caps cell parallelism. */
kmtl_status kmtl_experiment(const char* config_path, const char* out_dir,
                            int has_seed, uint64_t seed, char** info_out);

/* ---------------- in-memory API ---------------- */

typedef struct kmtl_model kmtl_model;

/* X is n x d, Y is n x k (row-major). options_json, when non-NULL, is the
 * object accepted as the "fit" config section; relative fixed-precision
 * paths resolve against the working directory. */
kmtl_status kmtl_fit(const double* X, const double* Y, int n, int d, int k,
                     const char* options_json, kmtl_model** model_out);

kmtl_status kmtl_model_load(const char* model_dir, kmtl_model** model_out);
kmtl_status kmtl_model_save(const kmtl_model* model, const char* model_dir);

kmtl_status kmtl_model_dims(const kmtl_model* model, int* d_out, int* k_out);

/* Buffers must hold d*k, d*d or k*k doubles as appropriate. */
kmtl_status kmtl_model_mean(const kmtl_model* model, double* out);
kmtl_status kmtl_model_row_cov(const kmtl_model* model, double* out);
kmtl_status kmtl_model_col_cov(const kmtl_model* model, double* out);
kmtl_status kmtl_model_row_precision(const kmtl_model* model, double* out);
kmtl_status kmtl_model_col_precision(const kmtl_model* model, double* out);

/* JSON with variant, dimensions, sigma2, penalty weights, convergence flag
 * and final objective value. */
kmtl_status kmtl_model_info(const kmtl_model* model, char** json_out);

/* X is n x d; y_out receives n * k doubles. Column means subtracted during
 * fitting are added back. */
kmtl_status kmtl_predict(const kmtl_model* model, const double* X, int n,
                         double* y_out);

void kmtl_model_free(kmtl_model* model);

/* In-memory graphical lasso. S and theta_out are p x p; tol <= 0 and
 * max_iter <= 0 select the defaults (1e-6, 2000). converged_out is 0/1. */
kmtl_status kmtl_glasso(const double* S, int p, double lambda, double tol,
                        int max_iter, double* theta_out,
                        double* kkt_residual_out, int* converged_out);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* KRONMTL_H */
