// Command-line front end. Everything interesting happens behind the C API;
// this file only parses arguments and relays status codes.

#include <CLI11.hpp>
#include <cstdint>
#include <cstdio>

#include "kronmtl/kronmtl.h"

namespace {

// Prints the info text on success, the last error on failure, and converts
// the status into a process exit code (0 ok, 1 usage, 2 config, 3 io,
// 4 numeric).
int finish(kmtl_status st, char* info) {
  if (st == KMTL_OK) {
    if (info && *info) std::fputs(info, stdout);
  } else {
    std::fprintf(stderr, "error: %s\n", kmtl_last_error());
  }
  kmtl_string_free(info);
  return static_cast<int>(st);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"kronmtl: low-rank multitask regression with structured priors"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kmtl_version());

  std::string config_path, data_dir, out_dir, model_dir, variant;
  std::string x_path, out_path, truth_path, pred_path, means_path, s_path, metric;
  std::uint64_t seed = 0;
  bool has_seed = false;
  double lambda = 0.0, threshold = 1e-8;

  auto* sim = app.add_subcommand("simulate", "Generate a synthetic dataset");
  sim->add_option("--config", config_path, "JSON config file");
  sim->add_option("--out", out_dir, "output directory")->required();
  sim->add_option("--seed", seed, "RNG seed override")
      ->each([&](const std::string&) { has_seed = true; });

  auto* fit = app.add_subcommand("fit", "Fit a model to X_train.csv / Y_train.csv");
  fit->add_option("--config", config_path, "JSON config file");
  fit->add_option("--data", data_dir, "directory with X_train.csv and Y_train.csv")
      ->required();
  fit->add_option("--out", model_dir, "model output directory")->required();
  fit->add_option("--variant", variant, "mvg, mvg-corr or mvg-rank");

  auto* pred = app.add_subcommand("predict", "Predict responses for new inputs");
  pred->add_option("--model", model_dir, "saved model directory")->required();
  pred->add_option("--x", x_path, "input matrix CSV")->required();
  pred->add_option("--out", out_path, "prediction output CSV")->required();

  auto* eval = app.add_subcommand("evaluate", "Score predictions against truth");
  eval->add_option("--metric", metric, "r2, auc or accuracy")->required();
  eval->add_option("--truth", truth_path, "reference matrix CSV")->required();
  eval->add_option("--pred", pred_path, "estimate matrix CSV")->required();
  eval->add_option("--means", means_path, "column means CSV for r2 baselines");
  eval->add_option("--threshold", threshold, "absolute edge threshold for auc");
  eval->add_option("--out", out_path, "write the metric value to this file");

  auto* gl = app.add_subcommand("glasso", "Sparse precision from a covariance");
  gl->add_option("--s", s_path, "covariance matrix CSV")->required();
  gl->add_option("--lambda", lambda, "l1 penalty weight")->required();
  gl->add_option("--out", out_path, "precision output CSV")->required();

  auto* exp = app.add_subcommand("experiment", "Run a simulation study");
  exp->add_option("--config", config_path, "JSON config file");
  exp->add_option("--out", out_dir, "output directory")->required();
  exp->add_option("--seed", seed, "RNG seed override")
      ->each([&](const std::string&) { has_seed = true; });

  CLI11_PARSE(app, argc, argv);

  const char* cfg = config_path.empty() ? nullptr : config_path.c_str();
  char* info = nullptr;
  kmtl_status st = KMTL_ERR_INVALID;

  if (sim->parsed())
    st = kmtl_simulate(cfg, out_dir.c_str(), has_seed ? 1 : 0, seed, &info);
  else if (fit->parsed())
    st = kmtl_fit_files(cfg, data_dir.c_str(), model_dir.c_str(),
                        variant.empty() ? nullptr : variant.c_str(), &info);
  else if (pred->parsed())
    st = kmtl_predict_files(model_dir.c_str(), x_path.c_str(), out_path.c_str(),
                            &info);
  else if (eval->parsed())
    st = kmtl_evaluate_files(metric.c_str(), truth_path.c_str(), pred_path.c_str(),
                             means_path.empty() ? nullptr : means_path.c_str(),
                             threshold,
                             out_path.empty() ? nullptr : out_path.c_str(), &info);
  else if (gl->parsed())
    st = kmtl_glasso_file(s_path.c_str(), lambda, out_path.c_str(), &info);
  else if (exp->parsed())
    st = kmtl_experiment(cfg, out_dir.c_str(), has_seed ? 1 : 0, seed, &info);
  return finish(st, info);
}
