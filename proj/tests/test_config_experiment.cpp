#include <doctest.h>

#include <cstdlib>
#include <fstream>
#include <string>

#include "core/config.hpp"
#include "core/csv.hpp"
#include "core/experiment.hpp"
#include "helpers.hpp"

using namespace kronmtl;

namespace {

std::string slurp(const std::string& path) { return read_text_file(path); }

ExperimentConfig tiny_experiment() {
  ExperimentConfig cfg;
  cfg.sim.n = 24;
  cfg.sim.d = 8;
  cfg.sim.k = 4;
  cfg.sim.rank = 1;
  cfg.sim.snr = 5.0;
  cfg.reps = 2;
  cfg.lambda_grid = {0.1, 1.0};
  cfg.models = {ModelKind::ridge, ModelKind::glasso, ModelKind::mvg_rank};
  cfg.seed = 42;
  return cfg;
}

}  // namespace

TEST_CASE("parse_sim_config reads values and applies defaults") {
  SimSpec s = parse_sim_config(R"({"sim": {"n": 30, "d": 12, "k": 5}})");
  CHECK(s.n == 30);
  CHECK(s.d == 12);
  CHECK(s.k == 5);
  CHECK(s.rank == SimSpec{}.rank);
  CHECK(s.snr == SimSpec{}.snr);

  // Entirely absent section: all defaults.
  SimSpec dfl = parse_sim_config("{}");
  CHECK(dfl.n == SimSpec{}.n);
}

TEST_CASE("unknown keys are config errors that name the key and section") {
  try {
    parse_sim_config(R"({"sim": {"n_train": 10}})");
    CHECK(false);
  } catch (const Error& e) {
    CHECK(e.kind == ErrKind::config);
    CHECK(std::string(e.what()).find("n_train") != std::string::npos);
  }
  try {
    parse_fit_config(R"({"fit": {"gama": 1.0}})");
    CHECK(false);
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("gama") != std::string::npos);
  }
  try {
    parse_sim_config(R"({"simulation": {}})");
    CHECK(false);
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("simulation") != std::string::npos);
  }
}

TEST_CASE("sections coexist and type errors carry the key path") {
  const std::string doc =
      R"({"sim": {"n": 20}, "fit": {"gamma": 0.5}, "experiment": {"reps": 3}})";
  CHECK(parse_sim_config(doc).n == 20);
  CHECK(parse_fit_config(doc).hp.gamma == 0.5);
  CHECK(parse_experiment_config(doc).reps == 3);

  try {
    parse_sim_config(R"({"sim": {"snr": "high"}})");
    CHECK(false);
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("sim.snr") != std::string::npos);
  }
}

TEST_CASE("parse_fit_config maps every field onto the fit configuration") {
  FitSettings fs = parse_fit_config(R"({"fit": {
    "variant": "mvg-corr",
    "gamma": 1.5,
    "lambda_r": 0.1,
    "lambda_c": 0.2,
    "center": false,
    "sigma2_init": 2.0,
    "fix_sigma2": true,
    "sigma2_denominator": "nk",
    "outer_tol": 1e-5,
    "outer_max_iter": 33,
    "mean_tol": 1e-9,
    "glasso_max_iter": 77,
    "fixed_row_precision": "R.csv"
  }})");
  CHECK(fs.variant == Variant::mvg_corr);
  CHECK(fs.hp.gamma == 1.5);
  CHECK(fs.hp.lambda_r == 0.1);
  CHECK(fs.hp.lambda_c == 0.2);
  CHECK(!fs.center);
  CHECK(*fs.fit.sigma2_init == 2.0);
  CHECK(fs.fit.fix_sigma2);
  CHECK(fs.fit.sigma2_denominator == Sigma2Denominator::nk);
  CHECK(fs.fit.outer_tol == 1e-5);
  CHECK(fs.fit.outer_max_iter == 33);
  CHECK(fs.fit.mean.tol == 1e-9);
  CHECK(fs.fit.prec.glasso.max_iter == 77);
  CHECK(*fs.fixed_row_precision_path == "R.csv");

  FitSettings sec = parse_fit_section(R"({"variant": "mvg"})");
  CHECK(sec.variant == Variant::mvg);
}

TEST_CASE("parse_experiment_config reads the grid, models and mode") {
  ExperimentConfig cfg = parse_experiment_config(R"({"experiment": {
    "sim": {"n": 40, "d": 16, "k": 4},
    "reps": 4,
    "lambda_grid": [0.01, 0.1],
    "models": ["ridge", "mvg-rank"],
    "tie_lambdas": false,
    "gamma": 0.7,
    "edge_threshold": 1e-5,
    "mode": "classification",
    "seed": 9
  }})");
  CHECK(cfg.sim.n == 40);
  CHECK(cfg.reps == 4);
  CHECK(cfg.lambda_grid == std::vector<double>{0.01, 0.1});
  CHECK(cfg.models == std::vector<ModelKind>{ModelKind::ridge, ModelKind::mvg_rank});
  CHECK(!cfg.tie_lambdas);
  CHECK(*cfg.gamma == 0.7);
  CHECK(cfg.edge_threshold == 1e-5);
  CHECK(cfg.mode == TaskMode::classification);
  CHECK(cfg.seed == 9);

  try {
    parse_experiment_config(R"({"experiment": {"models": ["bogus"]}})");
    CHECK(false);
  } catch (const Error& e) {
    CHECK(e.kind == ErrKind::config);
  }
}

TEST_CASE("argmax_onehot encodes row maxima with ties to the lowest index") {
  Matrix s(2, 3);
  s << 0.2, 0.9, 0.1,
       0.4, 0.4, 0.1;
  Matrix o = argmax_onehot(s);
  Matrix want(2, 3);
  want << 0, 1, 0, 1, 0, 0;
  CHECK((o - want).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("model names round trip") {
  for (ModelKind m : {ModelKind::glasso, ModelKind::ridge, ModelKind::nucnorm,
                      ModelKind::mvg, ModelKind::mvg_corr, ModelKind::mvg_rank})
    CHECK(model_from_name(model_name(m)) == m);
  CHECK_THROWS_AS(model_from_name("nope"), Error);
}

TEST_CASE("a small experiment runs, aggregates and writes deterministic csvs") {
  ExperimentConfig cfg = tiny_experiment();
  ExperimentResult res = run_experiment(cfg);

  // One cell per (model, rep) in config order.
  REQUIRE(res.cells.size() == 6);
  CHECK(res.cells[0].model == ModelKind::ridge);
  CHECK(res.cells[0].rep == 1);
  CHECK(res.cells[1].rep == 2);
  for (const auto& c : res.cells) CHECK(c.error.empty());

  // Predictive models carry r2; structural ones carry auc.
  CHECK(res.cells[0].r2.has_value());
  CHECK(res.cells[2].auc.has_value());   // glasso
  CHECK(!res.cells[2].r2.has_value());
  CHECK(res.cells[4].r2.has_value());    // mvg-rank carries both
  CHECK(res.cells[4].auc.has_value());

  // The edge model is the first structural model in priority order.
  REQUIRE(res.edge_model.has_value());
  CHECK(*res.edge_model == ModelKind::mvg_rank);
  CHECK(res.edge_counts.rows() == 4);

  testutil::TempDir tmp;
  write_experiment_csvs(tmp.path(), res);
  const std::string first = slurp(tmp.file("results.csv"));
  CHECK(first.rfind("model,rep,lambda,r2,auc,accuracy,converged", 0) == 0);
  CHECK(slurp(tmp.file("summary.csv")).size() > 0);
  CHECK(slurp(tmp.file("edges.csv")).size() > 0);

  // Re-running the identical configuration reproduces results.csv byte for
  // byte.
  ExperimentResult res2 = run_experiment(cfg);
  testutil::TempDir tmp2;
  write_experiment_csvs(tmp2.path(), res2);
  CHECK(slurp(tmp2.file("results.csv")) == first);
}

TEST_CASE("classification mode scores accuracy instead of r2") {
  ExperimentConfig cfg = tiny_experiment();
  cfg.mode = TaskMode::classification;
  cfg.models = {ModelKind::mvg_rank};
  cfg.reps = 1;
  ExperimentResult res = run_experiment(cfg);
  REQUIRE(res.cells.size() == 1);
  CHECK(res.cells[0].error.empty());
  CHECK(res.cells[0].accuracy.has_value());
  CHECK(!res.cells[0].r2.has_value());
  CHECK(*res.cells[0].accuracy >= 0.0);
  CHECK(*res.cells[0].accuracy <= 1.0);
}

TEST_CASE("the thread cap honors the environment override") {
  setenv("KRONMTL_THREADS", "3", 1);
  CHECK(experiment_thread_cap() == 3);
  setenv("KRONMTL_THREADS", "junk", 1);
  CHECK_THROWS_AS(experiment_thread_cap(), Error);
  unsetenv("KRONMTL_THREADS");
  CHECK(experiment_thread_cap() >= 1);
}
